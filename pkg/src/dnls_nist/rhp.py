"""Chebyshev collocation for the assembled Riemann-Hilbert problem and field extraction.

The solution is written Phi = I + C[V] with C the Cauchy transform over all
arcs and V the jump density sampled at mapped Chebyshev points. The jump
condition Phi_+ = Phi_- G becomes, at every node,

    V - C_-[V] (G - I) = G - I,

a dense linear system for the nodal values of V. Endpoints shared by several
arcs are handled by finite parts of the Cauchy transform.
"""

import csv
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import deform as df
from . import phase as ph
from .spectral import arc_weights, cauchy_matrix, cheb_nodes

TWO_PI_I = 2j * np.pi


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    n_per_arc: int = 24
    adaptive: bool = True
    n_max: int = 96
    self_tol: float = 1e-8
    residual_tol: float = 1e-8
    n_check: int = 10
    eta: float = 1e-9
    symmetric: bool = True

    def replace(self, **kw):
        return replace(self, **kw)


@dataclass
class CollocationSolution:
    arcs: list
    ns: list
    V: list
    residual: float
    lin_residual: float
    level: str
    problem: object = None
    degraded: bool = False
    wall: float = 0.0
    symmetric: bool = False
    pairs: list = None


def _approach(arc, s, side, eta=1e-9):
    """Unit direction from which node arc(s) is reached on the given side (+1 left)."""
    d = np.array([arc.tangent(x) if np.isfinite(arc(x)) else 1.0 for x in s])
    u = 1j * side * d
    u[s == -1] = d[s == -1] * np.exp(1j * side * eta)
    u[s == 1] = -d[s == 1] * np.exp(-1j * side * eta)
    return u


def _gather(prob, n_per_arc):
    used, ns, nodes, G = [], [], [], []
    for a in prob.arcs:
        n = max(8, int(round(n_per_arc * a.n_factor)))
        s = cheb_nodes(n)
        k = a.arc(s)
        fin = np.isfinite(k)
        g = np.tile(np.eye(2, dtype=complex), (n, 1, 1))
        if fin.any():
            g[fin] = prob.jump(a, k[fin])
        if not np.all(np.isfinite(g)):
            raise SolverError("non-finite jump on arc %s" % a.label)
        if np.max(np.abs(g - np.eye(2))) < prob.drop_tol:
            continue
        used.append(a)
        ns.append(n)
        nodes.append((s, k))
        G.append(g)
    return used, ns, nodes, G


def _cauchy_rows(arcs, ns, targets, approach):
    return np.hstack([cauchy_matrix(a.arc, targets, n, approach) for a, n in zip(arcs, ns)])


SIGMA3 = np.array([1.0, -1.0])


def _mirror_pairs(arcs, ns, G, tol=1e-9):
    """Indices (primary, mirror) covering every arc, or None if some arc has no
    k -> -k partner with the conjugated jump G(-k) = sigma3 G(k) sigma3."""
    pairs, taken = [], set()
    flip = np.outer(SIGMA3, SIGMA3)
    for i, a in enumerate(arcs):
        if i in taken:
            continue
        j = next((j for j in range(i + 1, len(arcs)) if j not in taken and ns[j] == ns[i]
                  and arcs[j].arc.is_mirror_of(a.arc)), None)
        if j is None:
            return None
        if np.max(np.abs(G[j] - flip * G[i])) > tol * max(1.0, np.max(np.abs(G[i]))):
            return None
        taken.update((i, j))
        pairs.append((i, j))
    return pairs


def _solve_dense(arcs, ns, nodes, G, cfg):
    k = np.concatenate([kk for _, kk in nodes])
    u = np.concatenate([_approach(a.arc, s, -1, cfg.eta) for a, (s, _) in zip(arcs, nodes)])
    fin = np.isfinite(k)
    Gm = np.concatenate(G) - np.eye(2)
    N = k.size
    Cm = np.zeros((N, N), complex)
    Cm[fin] = _cauchy_rows(arcs, ns, k[fin], u[fin])
    A = np.eye(2 * N, dtype=complex)
    for c in range(2):
        for c2 in range(2):
            A[c * N:(c + 1) * N, c2 * N:(c2 + 1) * N] -= Gm[:, c2, c][:, None] * Cm
    rhs = np.concatenate([Gm[:, :, 0], Gm[:, :, 1]], axis=0)  # column i = row i of Phi
    X = _lin_solve(A, rhs, arcs)
    lin = float(np.max(np.abs(A @ X - rhs)) / max(np.max(np.abs(rhs)), 1e-300))
    V = np.empty((N, 2, 2), complex)
    for i in range(2):
        V[:, i, 0] = X[:N, i]
        V[:, i, 1] = X[N:, i]
    return V, lin


def _solve_symmetric(arcs, ns, nodes, G, pairs, cfg):
    """Collocate on one arc of each mirror pair only.

    With V on the mirror arc equal to sigma3 V sigma3 at the same parameter,
    the mirror's Cauchy transform at k is sigma3 C[V](-k) sigma3, approached
    from -u. Each row of Phi gives an independent system on the primaries.
    """
    prim = [i for i, _ in pairs]
    parcs = [arcs[i] for i in prim]
    pns = [ns[i] for i in prim]
    k = np.concatenate([nodes[i][1] for i in prim])
    u = np.concatenate([_approach(arcs[i].arc, nodes[i][0], -1, cfg.eta) for i in prim])
    fin = np.isfinite(k)
    Gm = np.concatenate([G[i] for i in prim]) - np.eye(2)
    N = k.size
    C1 = np.zeros((N, N), complex)
    C2 = np.zeros((N, N), complex)
    C1[fin] = _cauchy_rows(parcs, pns, k[fin], u[fin])
    C2[fin] = _cauchy_rows(parcs, pns, -k[fin], -u[fin])
    Vp = np.empty((N, 2, 2), complex)
    lin = 0.0
    for i in range(2):
        A = np.eye(2 * N, dtype=complex)
        for c in range(2):
            for c2 in range(2):
                A[c * N:(c + 1) * N, c2 * N:(c2 + 1) * N] -= \
                    Gm[:, c2, c][:, None] * (C1 + SIGMA3[i] * SIGMA3[c2] * C2)
        rhs = np.concatenate([Gm[:, i, 0], Gm[:, i, 1]])
        X = _lin_solve(A, rhs, arcs)
        lin = max(lin, float(np.max(np.abs(A @ X - rhs)) / max(np.max(np.abs(rhs)), 1e-300)))
        Vp[:, i, 0] = X[:N]
        Vp[:, i, 1] = X[N:]
    V = [None] * len(arcs)
    flip = np.outer(SIGMA3, SIGMA3)
    off = 0
    for i, j in pairs:
        V[i] = Vp[off:off + ns[i]]
        V[j] = flip * V[i]
        off += ns[i]
    return np.concatenate(V), lin


def _lin_solve(A, rhs, arcs):
    try:
        X = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as e:
        raise SolverError("solver-failure (%s) on arcs %s" % (e, [a.label for a in arcs]))
    if not np.all(np.isfinite(X)):
        raise SolverError("solver-failure: non-finite density")
    return X


def solve_rhp(prob, n_per_arc=24, cfg=SolverConfig(), check=True):
    """Collocation solution at n_per_arc nodes per (unit-factor) arc.

    With check=False the a-posteriori jump residual is left at the linear
    residual; call `finish` later to evaluate it.
    """
    if n_per_arc < 8:
        raise ValueError("n_per_arc must be at least 8")
    t0 = time.perf_counter()
    arcs, ns, nodes, G = _gather(prob, n_per_arc)
    if not arcs:
        return CollocationSolution([], [], [], 0.0, 0.0, prob.level, prob, False,
                                   time.perf_counter() - t0)
    pairs = _mirror_pairs(arcs, ns, G) if cfg.symmetric else None
    if pairs is not None:
        V, lin = _solve_symmetric(arcs, ns, nodes, G, pairs, cfg)
    else:
        V, lin = _solve_dense(arcs, ns, nodes, G, cfg)
    Vs, off = [], 0
    for n in ns:
        Vs.append(V[off:off + n])
        off += n
    sol = CollocationSolution(arcs, ns, Vs, 0.0, lin, prob.level, prob)
    sol.symmetric = pairs is not None
    sol.pairs = pairs
    sol.residual = lin
    sol.wall = time.perf_counter() - t0
    if check:
        finish(sol, cfg)
    return sol


def finish(sol, cfg=SolverConfig()):
    """Evaluate the jump residual of a solution and flag it if degraded."""
    t0 = time.perf_counter()
    which = None if sol.pairs is None else [i for i, _ in sol.pairs]
    sol.residual = max(jump_residual(sol, cfg.n_check, which), sol.lin_residual)
    sol.degraded = sol.residual > cfg.residual_tol
    sol.wall += time.perf_counter() - t0
    return sol


def _cauchy_of(sol, k, approach=None):
    k = np.atleast_1d(np.asarray(k, complex))
    if not sol.arcs:
        return np.zeros(k.shape + (2, 2), complex)
    Vall = np.concatenate(sol.V)
    C = _cauchy_rows(sol.arcs, sol.ns, k, approach)
    return np.einsum("mn,nij->mij", C, Vall)


def evaluate_M(sol, k, side=None):
    """Phi(k) = I + C[V](k); points on an arc need side=+1 (left) or -1 (right)."""
    k = np.atleast_1d(np.asarray(k, complex))
    approach = None
    if side is not None:
        approach = np.empty(k.shape, complex)
        for i, z in enumerate(k):
            approach[i] = 1j * side
            for a in sol.arcs:
                s = a.arc.inverse(z)
                if np.isfinite(s) and abs(s.imag) < 1e-10 and abs(s.real) <= 1:
                    approach[i] = _approach(a.arc, np.array([s.real]), side)[0]
    else:
        for a in sol.arcs:
            s = a.arc.inverse(k)
            if np.any(np.isfinite(s) & (np.abs(s.imag) < 1e-10) & (np.abs(s.real) <= 1)):
                raise ValueError("k on arc %s needs a side" % a.label)
    return np.eye(2) + _cauchy_of(sol, k, approach)


def jump_residual(sol, n_check=10, which=None):
    """max |Phi_+ - Phi_- G| at points between the collocation nodes.

    `which` restricts the check to a subset of arc indices (for a symmetric
    solution the mirror arcs repeat the primaries' residual).
    """
    prob = sol.problem
    worst = 0.0
    idx = range(len(sol.arcs)) if which is None else which
    for a, n in ((sol.arcs[i], sol.ns[i]) for i in idx):
        th = np.pi * (np.arange(n - 1) + 0.5) / (n - 1)
        s = -np.cos(th)
        if n - 1 > n_check:
            s = s[np.linspace(0, n - 2, n_check).round().astype(int)]
        k = a.arc(s)
        ok = np.isfinite(k)
        s, k = s[ok], k[ok]
        G = prob.jump(a, k)
        Pp = np.eye(2) + _cauchy_of(sol, k, _approach(a.arc, s, +1))
        Pm = np.eye(2) + _cauchy_of(sol, k, _approach(a.arc, s, -1))
        r = np.abs(Pp - Pm @ G).max(axis=(1, 2)) / np.maximum(1, np.abs(G).max(axis=(1, 2)))
        worst = max(worst, float(r.max()))
    return worst


def extract_q(sol):
    """q = 2 i m12 with m12 = -(1/2 pi i) sum over arcs of int V12."""
    m12 = 0j
    for a, n, V in zip(sol.arcs, sol.ns, sol.V):
        m12 += arc_weights(a.arc, n) @ V[:, 0, 1]
    m12 = -m12 / TWO_PI_I
    return 2j * m12


# ---------------------------------------------------------------------------
# pointwise evolution


@dataclass
class FieldSample:
    x: float
    t: float
    q: complex
    level: str = ""
    n_per_arc: int = 0
    n_arcs: int = 0
    residual: float = np.nan
    self_change: float = np.nan
    wall: float = 0.0
    error: str = ""

    @property
    def ok(self):
        return not self.error


def solve_point(sd, x, t, dcfg=df.DeformConfig(), scfg=SolverConfig()):
    """One (x, t): build, solve (with n-doubling if adaptive) and extract."""
    t0 = time.perf_counter()
    p = ph.PhaseParams(float(x), float(t))
    prob = df.build_rhp(sd, p, dcfg)
    n = scfg.n_per_arc
    sol = solve_rhp(prob, n, scfg, check=False)
    q = extract_q(sol)
    change = np.nan
    if scfg.adaptive and sol.arcs:
        while 2 * n <= scfg.n_max:
            sol2 = solve_rhp(prob, 2 * n, scfg, check=False)
            q2 = extract_q(sol2)
            change = abs(q2 - q)
            n, sol, q = 2 * n, sol2, q2
            if change <= scfg.self_tol:
                break
    if sol.arcs:
        finish(sol, scfg)
    return FieldSample(p.x, p.t, complex(q), sol.level, n, len(sol.arcs), sol.residual, change,
                       time.perf_counter() - t0)


def evolve(sd, points, dcfg=df.DeformConfig(), scfg=SolverConfig()):
    """FieldSample per (x, t); failures are recorded per point, never raised."""
    out = []
    for x, t in points:
        try:
            out.append(solve_point(sd, x, t, dcfg, scfg))
        except (df.DeformationError, SolverError, ph.ContourError, ValueError,
                np.linalg.LinAlgError) as e:
            out.append(FieldSample(float(x), float(t), complex(np.nan, np.nan), error=str(e)))
    return out


CSV_FIELDS = ["x", "t", "re_q", "im_q", "abs_q", "level", "residual"]


def write_samples(samples, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for s in samples:
            num = [repr(float(v)) for v in (s.x, s.t, s.q.real, s.q.imag, abs(s.q))]
            w.writerow(num + [s.level if s.ok else "failed: " + s.error, repr(float(s.residual))])


def read_samples(path):
    out = []
    with open(path) as fh:
        for row in csv.DictReader(fh):
            q = complex(float(row["re_q"]), float(row["im_q"]))
            out.append(FieldSample(float(row["x"]), float(row["t"]), q, row["level"],
                                   residual=float(row["residual"])))
    return out
