"""Self-convergence of q(0, t) with and without contour deformation.

Writes a CSV with |q(24) - q(48)| for the undeformed axis problem and the
self-change of the deformed solve, for t in [2, 7].

    python3 scripts/oscillation_removal.py [out.csv]
"""

import csv
import sys

import numpy as np

from dnls_nist import deform as df
from dnls_nist import potentials as P
from dnls_nist.phase import PhaseParams
from dnls_nist.rhp import extract_q, solve_point, solve_rhp
from dnls_nist.scattering import scattering_data


def main(path="oscillation.csv"):
    sd = scattering_data(P.gauss_sech())
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "re_q", "im_q", "undeformed_change", "deformed_change"])
        for t in np.linspace(2, 7, 21):
            prob = df.build_rhp(sd, PhaseParams(0.0, t), df.DeformConfig(undeformed=True))
            q24, q48 = (extract_q(solve_rhp(prob, n, check=False)) for n in (24, 48))
            s = solve_point(sd, 0.0, t)
            w.writerow([t, s.q.real, s.q.imag, abs(q24 - q48), s.self_change])
            print("t=%.2f  undeformed %.2e  deformed %.2e" % (t, abs(q24 - q48), s.self_change))


if __name__ == "__main__":
    main(*sys.argv[1:])
