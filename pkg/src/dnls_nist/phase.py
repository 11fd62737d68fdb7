"""Phase theta(k) = k^2 x + 2 k^4 t, its sign field, saddles, regions and the
deformed contour skeletons.

Orientation of the continuous spectrum (the + side is D2 = {Im k^2 > 0}):
R+ runs 0 -> +inf, R- runs 0 -> -inf, iR+ runs i inf -> 0, iR- runs -i inf -> 0.

A skeleton is a list of arcs, each knowing the sector factor on its left (+)
and right (-) side. The jump on an arc is Psi_-^{-1} J0 Psi_+, where J0 is the
undeformed jump (T on the continuous spectrum, I elsewhere). Factor names:

    I, U-1, L   (T = L U)
    A, C-1      (T = A B C)
    W:I, W:T    (inside a saddle disk: no deformation, + side / - side)
"""

from dataclasses import dataclass, field

import numpy as np

from .spectral import Arc


class ContourError(RuntimeError):
    pass


@dataclass(frozen=True)
class PhaseParams:
    x: float
    t: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.t)):
            raise ValueError("x and t must be finite")
        if self.t < 0:
            raise ValueError("t must be non-negative")

    @property
    def lambda0(self):
        return None if self.t == 0 else -self.x / (4 * self.t)


def theta(k, p):
    k = np.asarray(k, complex)
    k2 = k * k
    return k2 * p.x + 2 * k2 * k2 * p.t


def dtheta(k, p):
    k = np.asarray(k, complex)
    return 2 * k * p.x + 8 * k ** 3 * p.t


def re_i_theta(k, p):
    """Re(i theta) by the product formula (so the axes give an exact zero)."""
    k = np.asarray(k, complex)
    k2 = k * k
    if p.t == 0:
        return -p.x * k2.imag
    return -4 * p.t * k2.imag * (k2.real - p.lambda0)


def re_i_theta_sign(k, p, band=1e-14):
    """+1, -1 or 0 per point (0 inside a relative band of width `band`)."""
    v = re_i_theta(k, p)
    k = np.asarray(k, complex)
    scale = band * (1 + np.abs(p.x) * np.abs(k) ** 2 + p.t * np.abs(k) ** 4)
    return np.where(np.abs(v) <= scale, 0, np.sign(v)).astype(int)


def f_curve(k, p):
    if p.t <= 0:
        raise ValueError("f(k) needs t > 0")
    k = np.asarray(k, complex)
    return k.real ** 2 - k.imag ** 2 - p.lambda0


@dataclass(frozen=True)
class SaddleSet:
    lambda0: float
    saddles: tuple

    @property
    def k1(self):
        """Nonzero saddle in the first quadrant closure (None if lambda0 == 0)."""
        if self.lambda0 == 0:
            return None
        if self.lambda0 > 0:
            return complex(np.sqrt(self.lambda0))
        return 1j * np.sqrt(-self.lambda0)


def saddle_points(p):
    if p.t <= 0:
        raise ValueError("saddle points are not defined at t = 0")
    lam = p.lambda0
    if lam == 0:
        return SaddleSet(0.0, (0j,))
    r = np.sqrt(lam) if lam > 0 else 1j * np.sqrt(-lam)
    return SaddleSet(lam, (0j, complex(r), complex(-r)))


@dataclass(frozen=True)
class RegionTag:
    region: str
    c1: float = 4.0


def classify_region(p, c1=4.0):
    if c1 <= 0:
        raise ValueError("c1 must be positive")
    if p.t <= 0:
        raise ValueError("regions are defined for t > 0")
    b = c1 * np.sqrt(p.t)
    if p.x < -b:
        return RegionTag("R2", c1)
    if p.x > b:
        return RegionTag("R3", c1)
    return RegionTag("R1", c1)


# ---------------------------------------------------------------------------
# skeletons


@dataclass
class SkeletonArc:
    label: str
    arc: Arc
    left: str
    right: str
    on_axis: bool = False
    kind: str = "ray"
    n_factor: float = 1.0
    b_support: bool = False

    def negated(self, label):
        # k -> -k is a rotation by pi: orientation and side labels are kept
        a, b, c, d = self.arc.coef
        return SkeletonArc(label, Arc(-a, -b, c, d), self.left, self.right, self.on_axis,
                           self.kind, self.n_factor, self.b_support)

    def to_dict(self):
        return {"label": self.label, "kind": self.kind, "left": self.left,
                "right": self.right, "on_axis": self.on_axis, "b_support": self.b_support,
                **self.arc.to_dict()}


@dataclass
class ContourSkeleton:
    arcs: list
    region: str
    arm_slope: float
    saddles: tuple = ()
    disks: list = field(default_factory=list)  # (center, radius)
    b_support: list = field(default_factory=list)  # oriented (start, end), end may be inf

    def labels(self):
        return [a.label for a in self.arcs]

    def to_dict(self):
        return {"region": self.region, "arm_slope": self.arm_slope,
                "saddles": [[s.real, s.imag] for s in self.saddles],
                "disks": [[c.real, c.imag, r] for c, r in self.disks],
                "arcs": [a.to_dict() for a in self.arcs]}


def default_ray_scale(p, arm_slope=0.1, cap=2.0):
    """Mobius scale of rays leaving 0: the decay length of exp(-2 |Im theta|) on the arm."""
    s4 = np.sin(4 * np.arctan(arm_slope))
    return float(min(cap, 0.8 * (1.55 * p.t * s4 / 0.388 + 0.1) ** -0.25))


def saddle_ray_scale(k1, p, arm_slope=0.1, cap=2.0):
    curv = 16 * p.t * abs(k1) ** 2 * np.sin(2 * np.arctan(arm_slope))
    return float(np.clip(1.5 / np.sqrt(curv + 1e-300), 0.02, cap))


def default_disk_radius(k1, p):
    return float(min(0.25 * abs(k1), 0.35 / (abs(k1) * np.sqrt(p.t))))


def _with_mirror(arcs):
    out = []
    for a in arcs:
        out.append(a)
        out.append(a.negated(a.label + "'"))
    return out


def undeformed_skeleton(scale=1.5):
    """The four half-axes carrying T."""
    arcs = [SkeletonArc("R+", Arc.ray(0, 1, scale), "I", "I", True, "axis", 4),
            SkeletonArc("iR+", Arc.ray(0, 1j, scale, inward=True), "I", "I", True, "axis", 4)]
    return ContourSkeleton(_with_mirror(arcs), "R0", 0.0, (0j,))


def _ray(label, z0, direction, scale, left, right, n_factor=2):
    return SkeletonArc(label, Arc.ray(z0, direction, scale), left, right, n_factor=n_factor)


def _seg(label, z0, z1, left, right, on_axis=False, b=False):
    return SkeletonArc(label, Arc.segment(z0, z1), left, right, on_axis, "segment", 1, b)


def _axis_ray(label, z0, direction, scale, left, right, b=False, inward=False):
    return SkeletonArc(label, Arc.ray(z0, direction, scale, inward=inward), left, right, True,
                       "axis", 2, b)


def build_skeleton(tag, p, arm_slope=0.1, disk_radius=None, ray_scale=None):
    """Straight-armed contour for the region; see the module docstring for labels.

    Every piece of R u iR is included (so that sector lookup by ray casting
    works); pieces where the jump reduces to B are flagged b_support.
    With disk_radius every nonzero saddle is surrounded by a disk inside which
    no deformation is applied; arcs are cut at the disk and its boundary is
    split where arcs or axes cross it.
    """
    if arm_slope <= 0 or arm_slope >= 1:
        raise ValueError("arm_slope must lie in (0, 1)")
    alpha = float(np.arctan(arm_slope))
    scale = ray_scale or default_ray_scale(p, arm_slope)
    region = tag.region
    S = saddle_points(p)
    e = lambda a: complex(np.exp(1j * a))
    h = np.pi / 2
    iray_up = [_ray("Sigma2", 0, e(h - alpha), scale, "U-1", "I"),
               _ray("Sigma3", 0, e(h + alpha), scale, "I", "L")]
    real_rays = [_ray("Sigma1", 0, e(alpha), scale, "I", "C-1"),
                 _ray("Sigma8", 0, e(-alpha), scale, "A", "I")]
    if region == "R1":
        arcs = real_rays + iray_up + [
            _axis_ray("R+", 0, 1, scale, "C-1", "A", b=True),
            _axis_ray("iR+", 0, 1j, scale, "U-1", "L", inward=True)]
        sk = ContourSkeleton(_with_mirror(arcs), "R1", arm_slope, S.saddles, [],
                             [(0j, np.inf), (0j, -np.inf)])
        _check_signs(sk, p)
        return sk

    k1 = S.k1
    if region == "R2" and not (S.lambda0 > 0):
        raise ContourError("R2 requires lambda0 > 0")
    if region == "R3" and not (S.lambda0 < 0):
        raise ContourError("R3 requires lambda0 < 0")
    rho = disk_radius or 0.0
    a1 = abs(k1)
    if rho >= 0.5 * a1:
        raise ContourError("saddle disk radius %.3g too large for |k1| = %.3g" % (rho, a1))
    sscale = saddle_ray_scale(k1, p, arm_slope)
    at = lambda ang: k1 + rho * e(ang)
    if region == "R2":
        apex = k1 / 2 + 1j * (a1 / 2) * arm_slope
        arcs = iray_up + [
            _ray("Sigma9", at(alpha), e(alpha), sscale, "I", "C-1"),
            _ray("Sigma16", at(-alpha), e(-alpha), sscale, "A", "I"),
            _seg("Sigma10a", 0, apex, "I", "U-1"),
            _seg("Sigma10b", apex, at(np.pi - alpha), "I", "U-1"),
            _seg("Sigma15a", 0, apex.conjugate(), "L", "I"),
            _seg("Sigma15b", apex.conjugate(), at(np.pi + alpha), "L", "I"),
            _seg("(0,k1)", 0, at(np.pi), "U-1", "L", on_axis=True),
            _axis_ray("(k1,inf)", at(0), 1, sscale, "C-1", "A", b=True),
            _axis_ray("iR+", 0, 1j, scale, "U-1", "L", inward=True)]
        support = [(k1, np.inf), (-k1, -np.inf)]
        pieces = [(0, alpha, "C-1", "W:I"), (alpha, np.pi - alpha, "I", "W:I"),
                  (np.pi - alpha, np.pi, "U-1", "W:I"), (np.pi, np.pi + alpha, "L", "W:T"),
                  (np.pi + alpha, 2 * np.pi - alpha, "I", "W:T"),
                  (2 * np.pi - alpha, 2 * np.pi, "A", "W:T")]
    else:
        apex = k1 / 2 + (a1 / 2) * arm_slope
        apex_l = -apex.conjugate()
        arcs = real_rays + [
            _ray("Sigma2", at(h - alpha), e(h - alpha), sscale, "U-1", "I"),
            _ray("Sigma3", at(h + alpha), e(h + alpha), sscale, "I", "L"),
            _seg("Sigma17a", 0, apex, "C-1", "I"),
            _seg("Sigma17b", apex, at(-h + alpha), "C-1", "I"),
            _seg("Sigma18a", 0, apex_l, "I", "A"),
            _seg("Sigma18b", apex_l, at(-h - alpha), "I", "A"),
            _axis_ray("R+", 0, 1, scale, "C-1", "A", b=True),
            _seg("(k1,0)", at(-h), 0, "C-1", "A", on_axis=True, b=True),
            _axis_ray("(i inf,k1)", at(h), 1j, sscale, "U-1", "L", inward=True)]
        support = [(0j, np.inf), (0j, -np.inf), (k1, 0j), (-k1, 0j)]
        pieces = [(-h + alpha, h - alpha, "I", "W:I"), (h - alpha, h, "U-1", "W:I"),
                  (h, h + alpha, "L", "W:T"), (h + alpha, 3 * h - alpha, "I", "W:T"),
                  (3 * h - alpha, 3 * h, "A", "W:T"), (3 * h, 3 * h + alpha, "C-1", "W:I")]
    disks = []
    if rho:
        disks = [(k1, rho), (-k1, rho)]
        for j, (a0, a1_, outside, inside) in enumerate(pieces):
            # Mobius arcs spread nodes unevenly over long angles: at most a quarter turn each
            m = int(np.ceil((a1_ - a0) / (np.pi / 2) - 1e-9))
            cuts = np.linspace(a0, a1_, m + 1)
            for i in range(m):
                label = "D%d" % j if m == 1 else "D%d.%d" % (j, i)
                arcs.append(SkeletonArc(label, Arc.circle_arc(k1, rho, cuts[i], cuts[i + 1]),
                                        inside, outside, kind="circle"))
    sk = ContourSkeleton(_with_mirror(arcs), region, arm_slope, S.saddles, disks, support)
    _check_signs(sk, p)
    return sk


def _ray_hits(arc, z, d):
    """Parameters s in [-1, 1] where arc(s) lies on the half-line z + r d, r > 0."""
    a, b, c, dd = arc.coef
    # (a s + b)/(c s + dd) - z = (al s + be)/(c s + dd)
    al, be = a - c * z, b - dd * z
    # Im[(al s + be) conj(c s + dd) / d] = 0, a real quadratic in s
    w = 1 / d
    q2 = (al * np.conj(c) * w).imag
    q1 = ((al * np.conj(dd) + be * np.conj(c)) * w).imag
    q0 = (be * np.conj(dd) * w).imag
    if abs(q2) > 1e-14 * (abs(q1) + abs(q0) + 1e-300):
        roots = np.roots([q2, q1, q0])
    elif abs(q1) > 0:
        roots = np.array([-q0 / q1])
    else:
        roots = np.array([])
    out = []
    for s in roots:
        if abs(s.imag) > 1e-9 or abs(s.real) > 1:
            continue
        s = s.real
        pt = complex(arc(s))
        if not np.isfinite(pt):
            continue
        r = ((pt - z) / d).real
        if r > 1e-12:
            out.append((r, s))
    return out


def sector_at(sk, z, direction=None):
    """Name of the sector factor at a point z off the skeleton.

    A half-line is cast from z towards the nearest axis; the first arc it
    crosses decides the sector through the side from which it is reached.
    """
    z = complex(z)
    for c, r in sk.disks:
        if abs(z - c) < r:
            return "W:I" if (z * z).imag > 0 else "W:T"
    if direction is None:
        if abs(z.imag) <= abs(z.real):
            direction = -1j * np.sign(z.imag or 1.0)
        else:
            direction = -np.sign(z.real or 1.0)
        direction = direction * np.exp(0.0123j)
    best = None
    for a in sk.arcs:
        for r, s in _ray_hits(a.arc, z, direction):
            if best is None or r < best[0]:
                best = (r, s, a)
    if best is None:
        return "I"
    r, s, a = best
    tan = a.arc.tangent(s)
    # z lies on the left of the arc iff -direction points left of the tangent
    left = (np.conj(tan) * (-direction)).imag > 0
    return a.left if left else a.right


# exponential carried by each factor: +1 for e^{2 i theta}, -1 for e^{-2 i theta}
FACTOR_EXP = {"C-1": 1, "L": 1, "A": -1, "U-1": -1}


def _check_signs(sk, p, n=5):
    """Each factor must not grow along the first quarter of the arms beside it.

    A growing exponential is tolerated up to the uniform bound exp(2 tan 2 alpha)
    (Region 1 arms pass close to the off-origin saddles)."""
    alpha = np.arctan(sk.arm_slope)
    bound = 2 * np.tan(2 * alpha) + 1e-9
    for a in sk.arcs:
        if a.kind == "circle" or a.on_axis:
            continue
        if a.arc.inf_at == -1:
            continue
        k = a.arc(-1 + 0.5 * np.arange(1, n + 1) / n)
        k = k[np.isfinite(k)]
        for side in (a.left, a.right):
            e = FACTOR_EXP.get(side)
            if e is None:
                continue
            # log |e^{2 i e theta}| = -2 e Im theta
            growth = -2 * e * np.imag(theta(k, p))
            if np.any(growth > bound):
                raise ContourError("contour-construction-failure: arc %s, factor %s grows "
                                   "(log-size %.3g)" % (a.label, side, growth.max()))
