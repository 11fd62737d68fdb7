"""Chebyshev machinery: nodes, transforms, differentiation, line maps, arcs
and Cauchy transforms of the Chebyshev basis on Mobius-mapped arcs.

All grids are second-kind Chebyshev points ordered ascending, x_0 = -1.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

TWO_PI_I = 2j * np.pi


def cheb_nodes(n):
    """Second-kind Chebyshev points on [-1, 1], ascending."""
    if n < 2:
        raise ValueError("need at least 2 Chebyshev nodes, got %d" % n)
    j = np.arange(n)
    # sine form keeps the grid exactly symmetric
    return np.sin(np.pi * (2 * j - (n - 1)) / (2 * (n - 1)))


def values_to_coeffs(values):
    """Chebyshev-T coefficients of the interpolant through values on cheb_nodes.

    Works along axis 0, so a (n, m) array gives m coefficient columns.
    """
    v = np.asarray(values)
    n = v.shape[0]
    if n < 2:
        raise ValueError("need at least 2 values, got %d" % n)
    N = n - 1
    vd = v[::-1]  # descending order, x_j = cos(j pi / N)
    ext = np.concatenate([vd, vd[N - 1:0:-1]], axis=0)
    c = np.fft.fft(ext, axis=0)[:n] / N
    c[0] /= 2
    c[N] /= 2
    if np.isrealobj(v):
        c = c.real
    return c


def coeffs_to_values(coeffs):
    """Inverse of values_to_coeffs."""
    c = np.array(coeffs, dtype=complex)
    n = c.shape[0]
    N = n - 1
    c[1:N] /= 2
    ext = np.concatenate([c, c[N - 1:0:-1]], axis=0)
    vd = np.fft.fft(ext, axis=0)[:n]
    out = vd[::-1]
    if np.isrealobj(coeffs):
        out = out.real
    return out


@lru_cache(maxsize=64)
def _v2c_matrix(n):
    m = values_to_coeffs(np.eye(n))
    m.setflags(write=False)
    return m


def values_to_coeffs_matrix(n):
    """The n x n matrix F with coeffs = F @ values."""
    return _v2c_matrix(n)


def cheb_eval(coeffs, s):
    """Clenshaw evaluation of a Chebyshev series at (complex) points s."""
    c = np.asarray(coeffs)
    s = np.asarray(s)
    b1 = np.zeros(np.broadcast(s, c[0]).shape, dtype=np.result_type(c, s))
    b2 = np.zeros_like(b1)
    for ck in c[:0:-1]:
        b1, b2 = 2 * s * b1 - b2 + ck, b1
    return s * b1 - b2 + c[0]


def cheb_vandermonde(s, n):
    """Matrix of T_k(s_i), k = 0..n-1 (recurrence, valid for complex s)."""
    s = np.asarray(s)
    T = np.empty(s.shape + (n,), dtype=np.result_type(s, float))
    T[..., 0] = 1
    if n > 1:
        T[..., 1] = s
    for k in range(2, n):
        T[..., k] = 2 * s * T[..., k - 1] - T[..., k - 2]
    return T


def cheb_derivative_matrix(n):
    """Coefficient-space differentiation: coeffs of f -> coeffs of f'."""
    if n < 2:
        raise ValueError("need n >= 2")
    D = np.zeros((n, n))
    for k in range(1, n):
        # d/dx T_k = k T_{k-1}*2 + ... standard sum over parity
        for j in range(k - 1, -1, -2):
            D[j, k] = 2 * k
    D[0, :] /= 2
    return D


@lru_cache(maxsize=64)
def _diff_matrix(n):
    N = n - 1
    x = np.cos(np.pi * np.arange(n) / N)
    c = np.ones(n)
    c[0] = c[N] = 2
    c *= (-1.0) ** np.arange(n)
    dX = x[:, None] - x[None, :]
    D = np.outer(c, 1 / c) / (dX + np.eye(n))
    D -= np.diag(D.sum(axis=1))
    D = D[::-1, ::-1].copy()
    D.setflags(write=False)
    return D


def diff_matrix(n):
    """Nodal differentiation matrix on the ascending grid."""
    return _diff_matrix(n)


@lru_cache(maxsize=64)
def _cc_weights(n):
    w = _moments(n) @ _v2c_matrix(n)
    w.setflags(write=False)
    return w


def clenshaw_curtis_weights(n):
    """Quadrature weights on the n-point grid for integrals over [-1, 1]."""
    return _cc_weights(n)


def interp_matrix(n, s):
    """Barycentric interpolation from the n-point grid to points s."""
    x = cheb_nodes(n)
    w = (-1.0) ** np.arange(n)
    w[0] /= 2
    w[-1] /= 2
    s = np.asarray(s)
    d = s[:, None] - x[None, :]
    hit = np.abs(d) < 1e-15
    d[hit] = 1.0
    P = w / d
    P /= P.sum(axis=1, keepdims=True)
    rows = np.nonzero(hit.any(axis=1))[0]
    for i in rows:
        P[i] = hit[i].astype(float)
    return P


# ---------------------------------------------------------------------------
# maps of the real line


@dataclass(frozen=True)
class LineMap:
    """tanh maps of the line (full) or half-lines (left: x<=0, right: x>=0)."""

    kind: str
    a_hat: float = 0.1

    def __post_init__(self):
        if self.kind not in ("full", "left", "right"):
            raise ValueError("unknown map kind %r" % self.kind)
        if not 0 < self.a_hat < 1:
            raise ValueError("a_hat must lie in (0, 1)")

    def _shift(self):
        return {"full": 0.0, "left": 1.0, "right": -1.0}[self.kind]

    def _scale(self):
        return 1.0 if self.kind == "full" else 2.0

    def apply(self, x):
        return self._scale() * np.tanh(self.a_hat * np.asarray(x, float)) + self._shift()

    def invert(self, s):
        s = np.asarray(s, float)
        th = (s - self._shift()) / self._scale()
        lo, hi = {"full": (-1, 1), "left": (-1, 0), "right": (0, 1)}[self.kind]
        ok = (th > lo) & (th < hi) if self.kind == "full" else (
            (th > lo) & (th <= hi) if self.kind == "left" else (th >= lo) & (th < hi))
        if not np.all(ok):
            raise ValueError("point outside the open range of the %s map" % self.kind)
        return np.arctanh(th) / self.a_hat

    def dHdx(self, s):
        """dH/dx expressed through s = H(x); zero at the image of infinity."""
        th = (np.asarray(s, float) - self._shift()) / self._scale()
        return self._scale() * self.a_hat * (1 - th ** 2)


# ---------------------------------------------------------------------------
# arcs


class Arc:
    """Arc in C given as the Mobius image M(s) = (a s + b)/(c s + d) of [-1, 1].

    M(-1) is the start, M(1) the end; one endpoint may be infinity.
    """

    def __init__(self, a, b, c, d):
        self.coef = tuple(complex(v) for v in (a, b, c, d))
        a, b, c, d = self.coef
        self.det = a * d - b * c
        if abs(self.det) == 0:
            raise ValueError("degenerate Mobius map")
        self.inf_at = None
        if abs(c - d) < 1e-14 * (abs(c) + abs(d)) and c != 0:
            self.inf_at = -1
        if abs(c + d) < 1e-14 * (abs(c) + abs(d)) and c != 0:
            self.inf_at = 1

    # constructors
    @classmethod
    def segment(cls, z0, z1):
        z0, z1 = complex(z0), complex(z1)
        return cls((z1 - z0) / 2, (z0 + z1) / 2, 0, 1)

    @classmethod
    def ray(cls, z0, direction, scale=1.0, inward=False):
        """Ray from z0 in `direction` to infinity (or back, if inward).

        `scale` is the distance from z0 of the image of s=0.
        """
        u = complex(direction)
        u = u / abs(u) * scale
        z0 = complex(z0)
        if inward:
            return cls(z0 - u, z0 + u, 1, 1)
        return cls(u - z0, z0 + u, -1, 1)

    @classmethod
    def through(cls, z0, zm, z1):
        """Mobius arc with M(-1)=z0, M(0)=zm, M(1)=z1 (all finite)."""
        A = np.array([[-1, 1, z0, -z0], [0, 1, 0, -zm], [1, 1, -z1, -z1]], dtype=complex)
        _, _, vh = np.linalg.svd(A)
        a, b, c, d = vh[-1].conj()
        if abs(c) < 1e-13 * np.max(np.abs([a, b, c, d])):
            c = 0.0
        return cls(a, b, c, d)

    @classmethod
    def circle_arc(cls, center, radius, ang0, ang1):
        """Arc of a circle from angle ang0 to ang1 (ccw if ang1 > ang0)."""
        p = [center + radius * np.exp(1j * a) for a in (ang0, 0.5 * (ang0 + ang1), ang1)]
        return cls.through(*p)

    def negated(self):
        """The arc s -> -M(s), image under k -> -k with the same parametrization."""
        a, b, c, d = self.coef
        return Arc(-a, -b, c, d)

    def is_mirror_of(self, other, tol=1e-10):
        s = np.array([-0.5, 0.0, 0.5])
        z, w = self(s), other(s)
        return bool(np.all(np.abs(z + w) <= tol * (1 + np.abs(w))))

    # evaluation
    def __call__(self, s):
        a, b, c, d = self.coef
        s = np.asarray(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (a * s + b) / (c * s + d)

    def deriv(self, s):
        a, b, c, d = self.coef
        s = np.asarray(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.det / (c * s + d) ** 2

    def inverse(self, z):
        a, b, c, d = self.coef
        z = np.asarray(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (d * z - b) / (a - c * z)

    @property
    def s_inf(self):
        """Preimage of infinity (None for affine maps)."""
        a, b, c, d = self.coef
        if c == 0:
            return None
        if self.inf_at is not None:
            return float(self.inf_at)
        return -d / c

    @property
    def start(self):
        return None if self.inf_at == -1 else complex(self(-1.0))

    @property
    def end(self):
        return None if self.inf_at == 1 else complex(self(1.0))

    def tangent(self, s):
        """Unit tangent (direction of travel) at parameter s."""
        if self.inf_at is not None and s == self.inf_at:
            raise ValueError("no tangent at infinity")
        d = complex(self.deriv(s))
        return d / abs(d)

    def points(self, n):
        return self(cheb_nodes(n))

    def to_dict(self):
        st, en = self.start, self.end
        enc = lambda z: None if z is None else [z.real, z.imag]
        return {"start": enc(st), "end": enc(en),
                "mid": enc(complex(self(0.0))),
                "mobius": [[v.real, v.imag] for v in self.coef]}

    def __repr__(self):
        return "Arc(%s -> %s)" % (self.start, self.end)


# ---------------------------------------------------------------------------
# Cauchy transforms


_MOMENTS = {}


def _moments(n):
    if n not in _MOMENTS:
        k = np.arange(n)
        even = k % 2 == 0
        m = np.zeros(n)
        m[even] = 2.0 / (1 - k[even].astype(float) ** 2)
        _MOMENTS[n] = m
    return _MOMENTS[n]


def _recurrence(t, seed, n):
    """I_k(t) = int T_k(s)/(s-t) ds by forward recurrence from I_0 = seed."""
    t = np.asarray(t, dtype=complex)
    mu = _moments(n)
    out = np.empty(t.shape + (n,), dtype=complex)
    out[..., 0] = seed
    if n > 1:
        out[..., 1] = 2 + t * seed
    for k in range(1, n - 1):
        out[..., k + 1] = 2 * t * out[..., k] - out[..., k - 1] + 2 * mu[k]
    return out


@lru_cache(maxsize=32)
def _gauss(m, n):
    x, w = np.polynomial.legendre.leggauss(m)
    return x, w, cheb_vandermonde(x, n)


def _quadrature(t, n):
    m = 5 * n + 20
    x, w, T = _gauss(m, n)
    return ((w / (x[None, :] - t[:, None])) @ T)


def _ellipse_rho(t):
    r = np.sqrt(t - 1) * np.sqrt(t + 1)
    return np.maximum(np.abs(t + r), np.abs(t - r))


def canonical_cauchy(t, n, side=None):
    """Rows I_k(t), k < n, for targets t off [-1, 1] (or on it with side=+-1)."""
    t = np.atleast_1d(np.asarray(t, dtype=complex))
    out = np.empty((t.size, n), dtype=complex)
    if side is not None:
        x = t.real
        seed = np.log((1 - x) / (1 + x)) + 1j * np.pi * np.asarray(side)
        return _recurrence(x, seed, n)
    rho = _ellipse_rho(t)
    near = np.log(rho) * max(n - 1, 1) < np.log(50.0)
    if near.any():
        tn = t[near]
        out[near] = _recurrence(tn, np.log((tn - 1) / (tn + 1)), n)
    if (~near).any():
        out[~near] = _quadrature(t[~near], n)
    return out


def _wrap(a, lo):
    return (a - lo) % (2 * np.pi) + lo


def _fp_seed(arc, end, phi):
    """Seed I_0 for the finite part at the mapped endpoint s=end (+-1).

    phi is the approach angle arg(z - p) in the physical plane; the log|z-p|
    singular part is excluded from the returned value.
    """
    if arc is None or arc.inf_at == end:
        # canonical finite part; only used against densities vanishing there
        base = 0.0
        ang = 0.0 if end == 1 else np.pi
    else:
        dM = complex(arc.deriv(float(end)))
        base = -np.log(abs(dM))
        ang = phi - np.angle(dM)
    if end == 1:
        return -np.log(2) + base + 1j * _wrap(ang, -np.pi)
    return np.log(2) - base + 1j * (np.pi - _wrap(ang, 0.0))


def cauchy_basis(arc, targets, n, approach=None, tol=1e-10):
    """Cauchy transforms (1/2 pi i) int_arc T_k(M^{-1}(xi))/(xi - z) d xi.

    Returns a (len(targets), n) complex matrix in the coefficient basis.
    `approach` gives, per target, a unit direction u such that the target is
    reached as lim z + r u, r -> 0+. It is required for targets on the arc:
    interior points get the one-sided boundary value, endpoints get the finite
    part (the +-f(p) log|z-p| / 2 pi i term removed).
    """
    z = np.atleast_1d(np.asarray(targets, dtype=complex))
    out = np.zeros((z.size, n), dtype=complex)
    if approach is None:
        u = np.full(z.size, np.nan + 0j)
    else:
        u = np.broadcast_to(np.asarray(approach, dtype=complex), z.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = arc.inverse(z)
    # finite z with preimage s = inf: the canonical transform vanishes there,
    # only the s_inf correction below remains
    pre_inf = np.isfinite(z) & ~np.isfinite(t)
    fin = np.isfinite(t) | pre_inf
    t = np.where(np.isfinite(t), t, 0)
    fin_t = fin & ~pre_inf
    at_end = fin_t & (np.abs(t - 1) < tol)
    at_start = fin_t & (np.abs(t + 1) < tol)
    on = fin_t & ~at_end & ~at_start & (np.abs(t.imag) < tol) & (np.abs(t.real) < 1)
    off = fin_t & ~at_end & ~at_start & ~on

    if off.any():
        out[off] = canonical_cauchy(t[off], n)
    if on.any():
        idx = np.nonzero(on)[0]
        uu = u[idx]
        if np.any(np.isnan(uu)):
            raise ValueError("target on the open arc needs a side")
        ut = uu / arc.deriv(t[idx].real)
        side = np.sign(ut.imag)
        if np.any(side == 0):
            raise ValueError("approach direction tangent to the arc")
        out[idx] = canonical_cauchy(t[idx].real, n, side=side)
    for mask, end in ((at_end, 1), (at_start, -1)):
        for i in np.nonzero(mask)[0]:
            if np.isnan(u[i]):
                raise ValueError("target at an arc endpoint needs an approach direction")
            seed = _fp_seed(arc, end, np.angle(u[i]))
            out[i] = _recurrence(np.array([float(end)]), seed, n)[0]

    sinf = arc.s_inf
    if sinf is not None:
        if arc.inf_at is not None:
            corr = _recurrence(np.array([float(arc.inf_at)]), _fp_seed(None, arc.inf_at, 0.0), n)[0]
        else:
            corr = canonical_cauchy(np.array([sinf]), n)[0]
        out[fin] -= corr
        out[~fin] = 0.0
    return out / TWO_PI_I


def cauchy_matrix(arc, targets, n, approach=None):
    """Like cauchy_basis but acting on values at the n-point grid."""
    return cauchy_basis(arc, targets, n, approach) @ values_to_coeffs_matrix(n)


def arc_weights(arc, n):
    """Weights w with int_arc f(xi) d xi ~ sum w_j f(M(s_j))."""
    s = cheb_nodes(n)
    with np.errstate(invalid="ignore", over="ignore"):
        w = clenshaw_curtis_weights(n) * arc.deriv(s)
    if arc.inf_at is not None:
        w = np.where(np.isfinite(w), w, 0)
        w[0 if arc.inf_at == -1 else -1] = 0
    return w
