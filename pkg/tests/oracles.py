"""Independent reference computations used by the tests.

None of these share code with the package beyond the potential samplers and
the phase function: the reflection coefficient comes from adaptive
Runge-Kutta on the Jost system, and reflectionless fields from the finite
linear algebra of the residue conditions. `factor_sizes` is a measurement
helper on a package contour rather than an oracle.
"""

import numpy as np
from scipy.integrate import solve_ivp

from dnls_nist import phase as ph

SIGMA3 = np.diag([1.0, -1.0])


def scattering_matrix_ode(q, k, X=7.0, w=0.5, rtol=1e-13, atol=1e-15):
    """S(k) from integrating psi_x = (-i k^2 sigma3 + k Q + i w |q|^2 sigma3) psi over [-X, X].

    q must be negligible outside [-X, X]. Works at complex k as long as the
    exponentials e^{+-i k^2 X} stay representable.
    """
    def rhs(x, y):
        psi = (y[:4] + 1j * y[4:]).reshape(2, 2)
        qq = q(x)
        A = np.array([[-1j * k * k + 1j * w * abs(qq) ** 2, k * qq],
                      [-k * np.conj(qq), 1j * k * k - 1j * w * abs(qq) ** 2]])
        d = (A @ psi).ravel()
        return np.r_[d.real, d.imag]

    e = np.array([1.0, -1.0])
    p0 = np.diag(np.exp(1j * k * k * X * e)).ravel()
    sol = solve_ivp(rhs, [-X, X], np.r_[p0.real, p0.imag], method="DOP853", rtol=rtol, atol=atol)
    y = sol.y[:, -1]
    psi = (y[:4] + 1j * y[4:]).reshape(2, 2)
    return np.linalg.solve(psi, np.diag(np.exp(-1j * k * k * X * e)))


def r_ode(q, k, **kw):
    S = scattering_matrix_ode(q, k, **kw)
    return S[0, 1] / S[1, 1]


def reflectionless_q(kappa, C, x, t):
    """q(x, t) for one eigenvalue quartet and no reflection.

    M has simple poles at +-kappa (second column) and +-conj(kappa) (first
    column); the four residue vectors satisfy a 4x4 linear system.
    """
    th = lambda k: k * k * x + 2 * k ** 4 * t
    kb = np.conj(kappa)
    c = C * np.exp(-2j * th(kappa))
    ct = -np.conj(C) * np.exp(2j * th(kb))
    e1, e2 = np.array([1, 0]), np.array([0, 1])
    # unknowns: A, B (column 1 at kb, -kb) and P, R (column 2 at kappa, -kappa)
    M = np.array([[1, 0, -ct / (kb - kappa), -ct / (kb + kappa)],
                  [0, 1, ct / (kb + kappa), ct / (kb - kappa)],
                  [-c / (kappa - kb), -c / (kappa + kb), 1, 0],
                  [c / (kappa + kb), c / (kappa - kb), 0, 1]], complex)
    rhs = np.array([ct * e2, ct * e2, c * e1, c * e1], complex)
    X = np.linalg.solve(M, rhs)
    return complex(2j * (X[2, 0] + X[3, 0]))


def factor_sizes(sk, p, n=20):
    """|e^{+-2 i theta}| of the factor on each side of every off-axis arc, n points per arc."""
    s = np.cos(np.pi * (np.arange(n) + 0.5) / n)
    out = []
    for a in sk.arcs:
        if a.on_axis or a.kind == "circle":
            continue
        k = a.arc(s)
        k = k[np.isfinite(k)]
        for side in (a.left, a.right):
            if side in ph.FACTOR_EXP:
                out.append(np.abs(np.exp(2j * ph.FACTOR_EXP[side] * ph.theta(k, p))))
    return np.concatenate(out)
