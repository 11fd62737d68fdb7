"""Assembly of the Riemann-Hilbert problem solved for given (x, t).

Every deformation is written as M_new = M0 Psi(k), where M0 solves the
undeformed problem (jump T on R u iR, poles at the eigenvalue quartets) and
Psi is piecewise analytic. On an arc with left side + and right side -, the
new jump is Psi_-^{-1} J0 Psi_+ (J0 = T on the continuous spectrum, else I).
Outside of saddle disks and soliton circles

    Psi = F Delta^{-1} K,

with F the sector factor (I, U^{-1}, L, A, C^{-1}), Delta = diag(1/D, D) the
scalar factor removing B (identity when B is kept) and K = diag(g, 1/g) the
optional rational conjugation. Inside a saddle disk Psi = W K with W = I on
the D2 side of the axis and T on the D1 side, so nothing singular is needed
there. Inside a soliton circle Psi removes the pole (P F Delta^{-1} K) or, for
K-conjugated quartets, the V-form V Delta^{-1}.
"""

from dataclasses import dataclass, field, replace

import dataclasses

import numpy as np

from . import phase as ph
from .spectral import Arc, cauchy_matrix, cheb_nodes, values_to_coeffs


class DeformationError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# factorizations of T


def _mat(a, b, c, d):
    a, b, c, d = np.broadcast_arrays(*(np.asarray(v, complex) for v in (a, b, c, d)))
    out = np.empty(a.shape + (2, 2), complex)
    out[..., 0, 0], out[..., 0, 1], out[..., 1, 0], out[..., 1, 1] = a, b, c, d
    return out


def _safe_mul_exp(coef, expo):
    """coef * exp(expo) with 0 * inf treated as 0."""
    with np.errstate(over="ignore", invalid="ignore"):
        v = coef * np.exp(expo)
    return np.where(coef == 0, 0, v)


@dataclass
class JumpFactors:
    """Entries em = r e^{-2 i theta}, ep = r~ e^{2 i theta}, d = 1 - r r~ at points k."""
    em: np.ndarray
    ep: np.ndarray
    d: np.ndarray

    @property
    def T(self):
        return _mat(1, self.em, -self.ep, self.d)

    @property
    def L(self):
        return _mat(1, 0, -self.ep, 1)

    @property
    def U(self):
        return _mat(1, self.em, 0, 1)

    @property
    def A(self):
        return _mat(1, self.em / self.d, 0, 1)

    @property
    def B(self):
        return _mat(1 / self.d, 0, 0, self.d)

    @property
    def C(self):
        return _mat(1, 0, -self.ep / self.d, 1)

    def sector(self, name):
        one = np.ones_like(self.d)
        if name in ("I", "W:I"):
            return _mat(one, 0, 0, one)
        if name == "W:T":
            return self.T
        if name == "U-1":
            return _mat(1, -self.em, 0, 1)
        if name == "L":
            return self.L
        if name == "A":
            return self.A
        if name == "C-1":
            return _mat(1, 0, self.ep / self.d, 1)
        raise KeyError(name)


def jump_factors(sd, k, p, reach=1.0):
    k = np.asarray(k, complex)
    th = ph.theta(k, p)
    r, rt = sd.r(k, reach), sd.rt(k, reach)
    d = 1 - r * rt
    if np.any(d == 0):
        raise DeformationError("singular-factorization: 1 - r r~ = 0")
    return JumpFactors(_safe_mul_exp(r, -2j * th), _safe_mul_exp(rt, 2j * th), d)


# ---------------------------------------------------------------------------
# scalar factor removing B


class DeltaFunction:
    """delta(k) = exp((1/2 pi i) int_S ln(1 - r r~)(z) / (z - k) dz on one oriented support.

    The support runs along one axis from `start` to `end` (end may be +-inf);
    ln(1 - r r~) is resolved on the panels of the reflection interpolant.
    """

    def __init__(self, sd, start, end, n_panel=24):
        self.start, self.end = complex(start), complex(end)
        self.n_panel = n_panel
        self.panels, self.values = [], []
        if sd.reflectionless:
            return
        # half-axis carrying the support and the parameter range along it
        ref = self.end if self.start == 0 else self.start
        u = complex(np.sign(ref.real)) if ref.imag == 0 or np.isinf(ref.real) else \
            1j * np.sign(ref.imag)
        interp = sd.r_real if u.imag == 0 else sd.r_imag
        lo, hi = sorted([abs(self.start), abs(self.end)])
        hi = min(hi, interp.length)
        if hi <= lo:
            return
        br = interp.breaks
        pts = np.unique(np.concatenate([[lo, hi], br[(br > lo) & (br < hi)]]))
        outward = abs(self.end) > abs(self.start)
        for a, b in zip(pts[:-1], pts[1:]):
            za, zb = (u * a, u * b) if outward else (u * b, u * a)
            arc = Arc.segment(za, zb)
            z = arc.points(n_panel)
            dd = 1 - sd.r(z) * sd.rt(z)
            if np.any(dd.real <= 0):
                raise DeformationError("delta-undefined: 1 - r r~ <= 0 near k = %s"
                                       % z[np.argmin(dd.real)])
            self.panels.append(arc)
            self.values.append(np.log(dd))
        if not outward:
            self.panels.reverse()
            self.values.reverse()

    @property
    def trivial(self):
        return not self.panels

    def log(self, k, approach=None):
        k = np.atleast_1d(np.asarray(k, complex))
        out = np.zeros(k.shape, complex)
        fin = np.isfinite(k)
        if self.trivial or not fin.any():
            return out
        if approach is None:
            approach = np.full(k.shape, np.exp(0.7j))
        approach = np.broadcast_to(approach, k.shape)
        for arc, v in zip(self.panels, self.values):
            out[fin] += cauchy_matrix(arc, k[fin], self.n_panel, approach[fin]) @ v
        return out

    def __call__(self, k, approach=None):
        return np.exp(self.log(k, approach))


def support_deltas(sd, skeleton):
    return [DeltaFunction(sd, a, b) for a, b in skeleton.b_support]


def delta_matrix(deltas, k, approach=None):
    """Delta = diag(1/D, D) with D the product of the deltas (shape (m, 2, 2))."""
    k = np.atleast_1d(np.asarray(k, complex))
    logD = np.zeros(k.shape, complex)
    for dl in deltas:
        logD = logD + dl.log(k, approach)
    D = np.exp(logD)
    return _mat(1 / D, 0, 0, D)


# ---------------------------------------------------------------------------
# soliton circles


@dataclass
class SolitonCircle:
    center: complex
    radius: float
    kind: str  # kappa, kappabar, -kappabar, -kappa (circles A1..A4)
    coef: complex  # c = C e^{-2 i theta(kappa)} or c~ = -conj(C) e^{2 i theta(conj kappa)}
    log_coef: complex
    quartet: int
    ccw: bool
    vform: bool = False

    def arcs(self):
        c, r = self.center, self.radius
        if self.ccw:
            return [Arc.circle_arc(c, r, 0, np.pi), Arc.circle_arc(c, r, np.pi, 2 * np.pi)]
        return [Arc.circle_arc(c, r, np.pi, 0), Arc.circle_arc(c, r, 2 * np.pi, np.pi)]

    def pole_removal(self, k):
        """P with M0 P analytic inside the circle."""
        k = np.asarray(k, complex)
        z = k - self.center
        if self.kind in ("kappa", "-kappa"):
            return _mat(1, -self.coef / z, 0, 1)
        return _mat(1, 0, -self.coef / z, 1)

    def vform_matrix(self, k, g):
        """V with M0 V analytic inside the circle when K = diag(g, 1/g) is in use."""
        k = np.asarray(k, complex)
        z = k - self.center
        if self.kind in ("kappa", "-kappa"):
            return _mat(g, 0, -z * g / self.coef, 1 / g)
        return _mat(g, -z / (self.coef * g), 0, 1 / g)


def default_epsilon(kappas):
    """0.4 min(axis distance, half the pairwise centre distance) over all quartets."""
    centers = []
    for k in kappas:
        centers += [k, k.conjugate(), -k.conjugate(), -k]
    dist = min(min(abs(k.real), abs(k.imag)) for k in kappas)
    pair = np.inf
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            pair = min(pair, abs(centers[i] - centers[j]))
    return 0.4 * min(dist, pair / 2)


def pole_to_jump(sd, p, epsilon=None):
    """Four circles per quartet; epsilon is shrunk to the admissible range."""
    if not sd.quartets:
        return []
    kappas = [q.kappa for q in sd.quartets]
    emax = default_epsilon(kappas) / 0.4 * 0.5
    eps = default_epsilon(kappas) if epsilon is None else min(epsilon, 0.999 * emax)
    if eps <= 1e-6:
        raise DeformationError("cannot-encircle: eigenvalue too close to an axis")
    out = []
    for j, (qt, C) in enumerate(zip(sd.quartets, sd.norming)):
        k = qt.kappa
        lc = np.log(complex(C)) - 2j * complex(ph.theta(k, p))
        # theta has real coefficients; the symmetry of mu gives c~ = -conj(c)
        lct = np.conj(lc) + 1j * np.pi
        for kind, cen, l, ccw in (("kappa", k, lc, True), ("kappabar", k.conjugate(), lct, False),
                                  ("-kappabar", -k.conjugate(), lct, False),
                                  ("-kappa", -k, lc, True)):
            out.append(SolitonCircle(cen, eps, kind, complex(np.exp(l)), l, j, ccw))
    return out


def k_conjugation_needed(quartet, C, p, threshold=1e3, epsilon=None):
    if not np.isfinite(threshold):
        return False
    eps = epsilon or default_epsilon([quartet.kappa])
    lc = np.log(complex(C)).real + 2 * np.imag(ph.theta(quartet.kappa, p))
    return bool(lc - np.log(eps) > np.log(threshold))


# ---------------------------------------------------------------------------
# assembled problem


LEVEL_NAMES = {("R0", True): "RHP 0", ("R1", True): "RHP I", ("R2", True): "RHP II",
               ("R3", True): "RHP III", ("R1", False): "RHP IV", ("R2", False): "RHP V",
               ("R3", False): "RHP VI"}


@dataclass(frozen=True)
class DeformConfig:
    c1: float = 4.0
    arm_slope: float = 0.1
    t_min: float = 1e-8
    t_threshold: float = 2.0
    epsilon: float = None
    k_threshold: float = 1e3
    force_k: bool = None
    disk_radius: float = None
    ray_scale: float = None
    axis_scale: float = 1.5
    undeformed: bool = False
    drop_tol: float = 1e-15
    reach: float = 1.0
    truncate: bool = True
    trunc_tol: float = 1e-14
    split_tol: float = 1e-9
    split_probe: int = 24
    pole_margin: float = 1 / 3

    def replace(self, **kw):
        return replace(self, **kw)


@dataclass
class RHArc:
    label: str
    arc: Arc
    left: tuple
    right: tuple
    on_axis: bool
    n_factor: float = 1.0
    kind: str = "ray"


@dataclass
class RHProblem:
    arcs: list
    level: str
    region: str
    p: ph.PhaseParams
    sd: object
    kset: list = field(default_factory=list)
    circles: list = field(default_factory=list)
    deltas: list = field(default_factory=list)
    skeleton: object = None
    drop_tol: float = 1e-15
    reach: float = 1.0

    @property
    def b_removed(self):
        return bool(self.deltas)

    # Psi evaluation -------------------------------------------------------
    def _g(self, k):
        g = np.ones(k.shape, complex)
        for j in self.kset:
            kap = self.sd.quartets[j].kappa
            kb = kap.conjugate()
            g = g * (k - kb) * (k + kb) / ((k - kap) * (k + kap))
        return g

    def psi(self, side, k, approach=None, dinv=None):
        """Psi for a side spec at points k (shape (m, 2, 2)).

        dinv, if given, is Delta^{-1} at k (it is shared by both sides of an arc).
        """
        k = np.atleast_1d(np.asarray(k, complex))
        if self.deltas and dinv is None:
            dinv = self._delta_inv(k, approach)
        kind, name = side[0], side[1]
        jf = jump_factors(self.sd, k, self.p, self.reach)
        g = self._g(k) if self.kset else None
        if kind == "disk":
            out = jf.sector(name)
        else:
            F = jf.sector(name) if kind in ("sector", "circle") else None
            if kind == "circle":
                circ = self.circles[side[2]]
                if circ.vform:
                    out = circ.vform_matrix(k, g)
                    if self.deltas:
                        out = out @ dinv
                    return out
                out = circ.pole_removal(k) @ F
            else:
                out = F
            if self.deltas:
                out = out @ dinv
        if g is not None:
            out = out @ _mat(g, 0, 0, 1 / g)
        return out

    def _delta_inv(self, k, approach):
        Dm = delta_matrix(self.deltas, k, approach)
        return _mat(Dm[..., 1, 1], 0, 0, Dm[..., 0, 0])

    def jump(self, arc, k, approach=None):
        """Jump Psi_-^{-1} J0 Psi_+ at points k of the arc."""
        k = np.atleast_1d(np.asarray(k, complex))
        if self.deltas and approach is None:
            # an endpoint may sit on a cut of delta: take the limit along the arc itself
            s = np.real(arc.arc.inverse(k))
            approach = np.array([arc.arc.tangent(v) for v in s]) * np.where(s < 0, 1, -1)
        dinv = self._delta_inv(k, approach) if self.deltas else None
        Pp = self.psi(arc.left, k, approach, dinv)
        Pm = self.psi(arc.right, k, approach, dinv)
        if arc.on_axis:
            J0 = jump_factors(self.sd, k, self.p, self.reach).T
            return np.linalg.solve(Pm, J0 @ Pp)
        return np.linalg.solve(Pm, Pp)

    def to_dict(self):
        return {"level": self.level, "region": self.region, "x": self.p.x, "t": self.p.t,
                "k_conjugated": [int(j) for j in self.kset],
                "circles": [{"center": [c.center.real, c.center.imag], "radius": c.radius,
                             "kind": c.kind, "ccw": c.ccw, "vform": c.vform}
                            for c in self.circles],
                "arcs": [{"label": a.label, "kind": a.kind, "left": list(map(str, a.left)),
                          "right": list(map(str, a.right)), **a.arc.to_dict()}
                         for a in self.arcs]}


def _side(name):
    return ("disk", name) if name.startswith("W:") else ("sector", name)


def _dist_to_arc(arc, z, n=400):
    s = np.cos(np.linspace(0, np.pi, n))
    pts = arc(s)
    pts = pts[np.isfinite(pts)]
    return np.min(np.abs(pts - z))


def _truncated(prob, a, tol, rho_max=1e3, m=160):
    """Finite piece of an arc reaching infinity, cut where the jump is I to within tol.

    Returns None when the jump is negligible along the whole arc, and the arc
    unchanged if the jump has not decayed by rho_max.
    """
    start, end = complex(a.arc(-1.0)), complex(a.arc(1.0))
    inward = not np.isfinite(start)
    z0 = end if inward else start
    far = a.arc(0.999 if not inward else -0.999)
    u = (far - z0) / abs(far - z0)
    rho = np.geomspace(1e-3, rho_max, m)
    res = dataclasses.replace(a, arc=Arc.segment(z0, z0 + u * rho_max))
    if inward:
        res = dataclasses.replace(a, arc=Arc.segment(z0 + u * rho_max, z0))
    big = np.abs(prob.jump(res, z0 + u * rho) - np.eye(2)).max(axis=(1, 2)) > tol
    if not big.any():
        return None
    j = np.nonzero(big)[0][-1]
    if j == m - 1:
        return a
    R = rho[j + 1]
    seg = Arc.segment(z0 + u * R, z0) if inward else Arc.segment(z0, z0 + u * R)
    return dataclasses.replace(a, arc=seg)


def _is_straight(arc):
    z0, z1, zm = complex(arc(-1.0)), complex(arc(1.0)), complex(arc(0.0))
    return abs((zm - z0) * np.conj(z1 - z0)).real > 0 and \
        abs(((zm - z0) * np.conj(z1 - z0)).imag) < 1e-12 * abs(z1 - z0) ** 2


def _split(prob, a, n_probe=24, tol=1e-9, min_len=1e-3, depth=6):
    """Bisect a straight arc until the jump on each piece is resolved by n_probe points."""
    z0, z1 = complex(a.arc(-1.0)), complex(a.arc(1.0))
    seg = Arc.segment(z0, z1)
    g = prob.jump(dataclasses.replace(a, arc=seg), seg(cheb_nodes(n_probe))).reshape(n_probe, 4)
    c = values_to_coeffs(g - np.eye(2).ravel())
    scale = max(1.0, np.abs(g).max())
    if depth == 0 or abs(z1 - z0) < 2 * min_len or np.abs(c[-4:]).max() <= tol * scale:
        return [dataclasses.replace(a, arc=seg)]
    zm = 0.5 * (z0 + z1)
    out = []
    for i, (za, zb) in enumerate(((z0, zm), (zm, z1))):
        piece = dataclasses.replace(a, arc=Arc.segment(za, zb), label="%s.%d" % (a.label, i),
                                    n_factor=max(a.n_factor / 2, 1.0))
        out += _split(prob, piece, n_probe, tol, min_len, depth - 1)
    return out


def build_rhp(sd, p, cfg=DeformConfig()):
    """Dispatch on (t, region, solitons) and assemble the problem to solve."""
    if p.t < cfg.t_min or cfg.undeformed:
        sk = ph.undeformed_skeleton(cfg.axis_scale)
        region, keep_b = "R0", True
    else:
        tag = ph.classify_region(p, cfg.c1)
        region = tag.region
        keep_b = p.t < cfg.t_threshold
        rho = None
        if not keep_b and region != "R1":
            k1 = ph.saddle_points(p).k1
            rho = cfg.disk_radius or ph.default_disk_radius(k1, p)
            # T is continued into the lower half of the disk: keep clear of poles of r
            poles = sd.singularities()
            if poles.size and cfg.disk_radius is None:
                rho = min(rho, cfg.pole_margin * np.min(np.abs(poles - k1)))
        try:
            sk = ph.build_skeleton(tag, p, cfg.arm_slope, rho, cfg.ray_scale)
        except ph.ContourError as e:
            raise DeformationError("%s: %s" % (LEVEL_NAMES[(region, keep_b)], e))
    level = LEVEL_NAMES[(region, keep_b)]

    if not keep_b:
        try:
            deltas = support_deltas(sd, sk)
        except DeformationError as e:
            raise DeformationError("%s: %s" % (level, e))
        deltas = [d for d in deltas if not d.trivial]
    else:
        deltas = []

    arcs = []
    for a in sk.arcs:
        if a.b_support and not keep_b:
            continue  # jump is exactly I once B is removed
        arcs.append(RHArc(a.label, a.arc, _side(a.left), _side(a.right), a.on_axis,
                          a.n_factor, a.kind))

    circles = pole_to_jump(sd, p, cfg.epsilon) if sd.quartets else []
    # keep soliton circles clear of every arc and disk
    if circles:
        eps = circles[0].radius
        for c in circles:
            for a in sk.arcs:
                eps = min(eps, 0.8 * _dist_to_arc(a.arc, c.center))
            for cen, r in sk.disks:
                eps = min(eps, 0.8 * (abs(cen - c.center) - r))
        if eps <= 1e-6:
            raise DeformationError("%s: cannot-encircle: no room for soliton circles" % level)
        for c in circles:
            c.radius = eps
    kset = []
    for j, (qt, C) in enumerate(zip(sd.quartets, sd.norming)):
        need = k_conjugation_needed(qt, C, p, cfg.k_threshold, circles[0].radius) \
            if cfg.force_k is None else cfg.force_k
        if need:
            kset.append(j)
    for i, c in enumerate(circles):
        sec = ph.sector_at(sk, c.center)
        if sec.startswith("W:"):
            raise DeformationError("%s: soliton circle inside a saddle disk" % level)
        c.vform = c.quartet in kset
        if c.vform and sec != "I":
            # the V-form assumes no sector factor at the eigenvalue
            c.vform = False
            kset = [j for j in kset if j != c.quartet]
        inside = ("circle", sec, i)
        outside = ("sector", sec)
        for j, arc in enumerate(c.arcs()):
            left, right = (inside, outside) if c.ccw else (outside, inside)
            arcs.append(RHArc("A%d:%s:%d" % (c.quartet, c.kind, j), arc, left, right, False, 1,
                              "circle"))
    for c in circles:
        c.vform = c.quartet in kset
    if kset:
        level += " / N4"
    elif circles:
        level += " / N"
    prob = RHProblem(arcs, level, region, p, sd, kset, circles, deltas, sk, cfg.drop_tol,
                     cfg.reach)
    if cfg.truncate:
        # pieces of an arc's k -> -k mirror are the negated pieces, so that the
        # solver can pair them exactly
        done, cut = [], []
        for a in prob.arcs:
            twin = next((d for d in done if d[0].arc.is_mirror_of(a.arc)), None)
            if twin is not None:
                pieces = [dataclasses.replace(a, arc=b.arc.negated(),
                                              label=a.label + b.label[len(twin[0].label):],
                                              n_factor=b.n_factor) for b in twin[1]]
            else:
                b = _truncated(prob, a, cfg.trunc_tol) if a.arc.inf_at is not None else a
                if b is None:
                    pieces = []
                elif (region != "R0" and b.kind != "circle" and b.arc.inf_at is None
                      and _is_straight(b.arc)):
                    pieces = _split(prob, b, cfg.split_probe, cfg.split_tol)
                else:
                    pieces = [b]
                done.append((a, pieces))
            cut += pieces
        prob.arcs = cut
    return prob
