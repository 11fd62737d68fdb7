"""Direct scattering: discrete eigenvalues, Jost solutions at x=0, reflection
coefficient and norming constants.

Lax pair (x-part): psi_x = (-i k^2 sigma3 + k Q + Q1) psi with
Q = [[0, q], [-conj q, 0]] and Q1 = i w |q|^2 sigma3 (w from the variant).
mu = psi exp(i k^2 x sigma3) tends to I at -inf (mu1) and +inf (mu2).
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.interpolate import AAA

from .spectral import (LineMap, cheb_nodes, diff_matrix, values_to_coeffs,
                       cheb_eval, cheb_derivative_matrix)


class ScatteringError(RuntimeError):
    pass


class NearZeroDenominator(ScatteringError):
    pass


# ---------------------------------------------------------------------------
# eigenvalues


def assemble_eigenproblem(pot, n1, a_hat=0.1):
    """The 4 n1 x 4 n1 matrix A with A [k psi; psi] = k [k psi; psi]."""
    if n1 < 16:
        raise ValueError("n1 must be at least 16")
    lm = LineMap("full", a_hat)
    s = cheb_nodes(n1)
    q = np.zeros(n1, complex)
    q[1:-1] = pot(lm.invert(s[1:-1]))
    w = pot.weight * np.abs(q) ** 2
    Dx = lm.dHdx(s)[:, None] * diff_matrix(n1)
    Z = np.zeros((n1, n1))
    I = np.eye(n1)
    top = np.block([[Z, np.diag(-1j * q), np.diag(w) + 1j * Dx, Z],
                    [np.diag(-1j * q.conj()), Z, Z, np.diag(w) - 1j * Dx]])
    bot = np.block([[I, Z, Z, Z], [Z, I, Z, Z]])
    return np.vstack([top, bot])


@dataclass(frozen=True)
class EigenQuartet:
    kappa: complex
    residual: float

    @property
    def members(self):
        k = self.kappa
        return (k, k.conjugate(), -k.conjugate(), -k)


def raw_spectrum(pot, n1, a_hat=0.1, vectors=False):
    A = assemble_eigenproblem(pot, n1, a_hat)
    if vectors:
        lam, V = sla.eig(A)
        return lam, V, A
    return sla.eigvals(A)


def discrete_eigenvalues(pot, n1=400, a_hat=0.1, axis_tol=5e-2, a_tol=1e-6,
                         verify=True, verify_n1=None):
    """Quartets of discrete eigenvalues, each listed by its first-quadrant member.

    Eigenvalues within axis_tol of R or iR are discarded as continuous
    spectrum; the survivors are clustered by symmetry and, if verify, checked
    by |a(kappa)| <= a_tol with an independent half-line solve.
    """
    try:
        lam, V, A = raw_spectrum(pot, n1, a_hat, vectors=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise ScatteringError("eigen-solver failure: %s" % e)
    keep = np.isfinite(lam) & (np.minimum(np.abs(lam.real), np.abs(lam.imag)) > axis_tol)
    cand = np.nonzero(keep)[0]
    quartets = []
    used = np.zeros(lam.size, bool)
    for i in cand[np.argsort(-np.abs(lam[cand].imag))]:
        if used[i]:
            continue
        rep = abs(lam[i].real) + 1j * abs(lam[i].imag)
        members = [rep, rep.conjugate(), -rep.conjugate(), -rep]
        idx = []
        for m in members:
            d = np.abs(lam[cand] - m)
            d[used[cand]] = np.inf
            j = np.argmin(d)
            if d[j] < axis_tol:
                idx.append(cand[j])
        if len(idx) < 4:
            used[i] = True
            continue
        used[idx] = True
        first = idx[0]  # member closest to the first-quadrant point
        kap = lam[first]
        v = V[:, first]
        res = np.linalg.norm(A @ v - kap * v) / np.linalg.norm(v)
        quartets.append(EigenQuartet(complex(kap), float(res)))
    if verify and quartets:
        n1v = verify_n1 or max(n1, 200)
        ok = []
        for qt in quartets:
            a = a_coefficient(pot, qt.kappa, n1v, a_hat)
            if abs(a) <= a_tol:
                ok.append(qt)
        quartets = ok
    return sorted(quartets, key=lambda q: (-q.kappa.imag, q.kappa.real))


# ---------------------------------------------------------------------------
# Jost solutions on half-lines


def _halfline_grid(pot, side, n1, a_hat):
    lm = LineMap(side, a_hat)
    s = cheb_nodes(n1)
    inf_node = 0 if side == "left" else n1 - 1
    q = np.zeros(n1, complex)
    finite = np.arange(n1) != inf_node
    q[finite] = pot(lm.invert(s[finite]))
    Dx = lm.dHdx(s)[:, None] * diff_matrix(n1)
    return q, Dx, inf_node


def _block_template(Dx):
    n = Dx.shape[0]
    M = np.zeros((2 * n, 2 * n), complex)
    M[:n, :n] = Dx
    M[n:, n:] = Dx
    return M


def mu_halfline(pot, k, side, n1=256, a_hat=0.1, columns=(0, 1), _grid=None):
    """mu_j(0, 0, k): side 'left' gives mu1 (normalised at -inf), 'right' mu2.

    Columns not requested are returned as NaN (they need not exist off the
    continuous spectrum).
    """
    k = complex(k)
    q, Dx, inf_node = _grid if _grid is not None else _halfline_grid(pot, side, n1, a_hat)
    n = q.size
    w = pot.weight * np.abs(q) ** 2
    out = np.full((2, 2), np.nan, complex)
    At0 = np.zeros((2, 2, n), complex)  # U = k Q + Q1 at nodes
    At0[0, 0] = 1j * w
    At0[1, 1] = -1j * w
    At0[0, 1] = k * q
    At0[1, 0] = -k * q.conj()
    read = n - 1 if side == "left" else 0
    base = _block_template(Dx)
    d = np.arange(n)
    for j in columns:
        sj = 1 if j == 0 else -1
        lin = np.array([-1j * k * k * (1 - sj), -1j * k * k * (-1 - sj)])
        M = base.copy()
        M[d, d] -= lin[0] + At0[0, 0]
        M[n + d, n + d] -= lin[1] + At0[1, 1]
        M[d, n + d] = -At0[0, 1]
        M[n + d, d] = -At0[1, 0]
        rhs = np.concatenate([At0[0, j], At0[1, j]])
        for r in (inf_node, n + inf_node):
            M[r] = 0
            M[r, r] = 1
            rhs[r] = 0
        try:
            phi = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            raise ScatteringError("singular collocation matrix at k=%s" % k)
        if not np.all(np.isfinite(phi)):
            raise ScatteringError("non-finite Jost solution at k=%s" % k)
        col = np.array([phi[read], phi[n + read]])
        col[j] += 1
        out[:, j] = col
    return out


def scattering_matrix(pot, k, n1=256, a_hat=0.1):
    """S = mu1(0)^{-1} mu2(0) = [[a~, b], [b~, a]]."""
    m1 = mu_halfline(pot, k, "left", n1, a_hat)
    m2 = mu_halfline(pot, k, "right", n1, a_hat)
    adj = np.array([[m1[1, 1], -m1[0, 1]], [-m1[1, 0], m1[0, 0]]])
    return adj @ m2


def a_coefficient(pot, k, n1=256, a_hat=0.1):
    """a(k) = det([mu1]_1, [mu2]_2), analytic where Im k^2 > 0."""
    c1 = mu_halfline(pot, k, "left", n1, a_hat, columns=(0,))[:, 0]
    c2 = mu_halfline(pot, k, "right", n1, a_hat, columns=(1,))[:, 1]
    return c1[0] * c2[1] - c1[1] * c2[0]


def reflection_coefficient(pot, k, n1=256, a_hat=0.1, min_a=1e-12):
    S = scattering_matrix(pot, k, n1, a_hat)
    if abs(S[1, 1]) < min_a:
        raise NearZeroDenominator("|a(k)| = %.3g at k=%s" % (abs(S[1, 1]), k))
    return S[0, 1] / S[1, 1]


def _segment_direction(kappa):
    # parallel to the nearest axis keeps the distance to both axes fixed
    return 1.0 if abs(kappa.imag) <= abs(kappa.real) else 1j


def a_prime(pot, kappa, n1=256, a_hat=0.1, halfwidth=None, n_seg=32, a_func=None):
    """a'(kappa) by differentiating a Chebyshev interpolant of a along a segment."""
    kappa = complex(kappa)
    dist = min(abs(kappa.real), abs(kappa.imag))
    h = 0.1 * dist if halfwidth is None else halfwidth
    e = _segment_direction(kappa)
    s = cheb_nodes(n_seg)
    pts = kappa + h * e * s
    if np.any(pts.real * pts.imag * (kappa.real * kappa.imag) <= 0):
        raise ValueError("sampling segment leaves the analyticity quadrant")
    f = a_func or (lambda k: a_coefficient(pot, k, n1, a_hat))
    vals = np.array([f(p) for p in pts])
    c = values_to_coeffs(vals)
    dc = cheb_derivative_matrix(n_seg) @ c
    return complex(cheb_eval(dc, 0.0)) / (h * e)


def b_at_eigenvalue(pot, kappa, n1=256, a_hat=0.1, tol=1e-6):
    """b with [mu2]_2(kappa) = b [mu1]_1(kappa) at x = t = 0 (least squares)."""
    v1 = mu_halfline(pot, kappa, "left", n1, a_hat, columns=(0,))[:, 0]
    v2 = mu_halfline(pot, kappa, "right", n1, a_hat, columns=(1,))[:, 1]
    b = np.vdot(v1, v2) / np.vdot(v1, v1)
    ratios = v2 / v1
    spread = abs(ratios[0] - ratios[1]) / abs(b)
    if spread > tol:
        raise ScatteringError("eigenfunction columns not proportional at kappa=%s "
                              "(relative spread %.2e)" % (kappa, spread))
    return complex(b), float(spread)


def norming_constant(pot, kappa, n1=256, a_hat=0.1, n_seg=32):
    b, _ = b_at_eigenvalue(pot, kappa, n1, a_hat)
    return b / a_prime(pot, kappa, n1, a_hat, n_seg=n_seg)


# ---------------------------------------------------------------------------
# scattering data


@dataclass(frozen=True)
class ScatterConfig:
    n1_eig: int = 400
    a_hat: float = 0.1
    n1_r: int = 128
    n_panel: int = 24
    r_tol: float = 1e-12
    axis_tol: float = 5e-2
    a_tol: float = 1e-6
    n_seg: int = 32
    n1_norm: int = 256
    r_floor: float = 1e-15
    k_max: float = 8.0
    reflectionless_tol: float = 1e-10
    find_eigenvalues: bool = True

    def replace(self, **kw):
        from dataclasses import replace
        return replace(self, **kw)


class AxisInterp:
    """r along a half-axis, u in [0, length], sampled on adaptive Chebyshev panels.

    Panels are split until their trailing coefficients fall below the
    tolerance. Evaluation uses one AAA rational fit through all panel samples:
    it agrees with the panels on the axis and, unlike the panel polynomials,
    continues analytically off the axis without seams at the breaks.
    Beyond the last break the interpolant is zero.
    """

    def __init__(self, breaks, panel_values, chop=1e-15, aaa_tol=1e-12):
        self.breaks = np.asarray(breaks, float)
        self.panel_values = [np.asarray(v, complex) for v in panel_values]
        scale = max([np.max(np.abs(v)) for v in self.panel_values] + [1e-300])
        self.coeffs = []
        for v in self.panel_values:
            c = values_to_coeffs(v)
            big = np.nonzero(np.abs(c) > chop * scale)[0]
            self.coeffs.append(c[:big[-1] + 1] if big.size else np.zeros(1, complex))
        self._rational = None
        if scale > 1e-300 and np.max(np.abs(self.values)) > 0:
            self._rational = self._fit_rational(aaa_tol)

    @property
    def length(self):
        return self.breaks[-1]

    def _fit_rational(self, rtol, band=0.5, doublet=1e-10, max_rtol=1e-9, noise=1e-12):
        """AAA fit, loosened until no spurious pole (tiny residue) sits near the axis.

        Fitting below the noise level of the samples produces pole-zero doublets
        right next to the axis; they are harmless on the axis but not on a lens.
        """
        u, idx = np.unique(self.nodes, return_index=True)
        v = self.values[idx]
        scale = np.max(np.abs(v))
        if scale < noise:
            # nothing but roundoff to fit; zero is as accurate and has no poles
            return None
        while True:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                fit = AAA(u, v, rtol=rtol)
            p, res = fit.poles(), fit.residues()
            near = (p.real > -band) & (p.real < self.length + band) & (np.abs(p.imag) < band)
            # an unconverged fit is chasing noise, like a doublet
            clean = not caught and not np.any(near & (np.abs(res) < doublet * scale))
            if clean or rtol >= max_rtol:
                return fit
            rtol *= 10

    @property
    def nodes(self):
        out = []
        for lo, hi, v in zip(self.breaks[:-1], self.breaks[1:], self.panel_values):
            out.append(lo + 0.5 * (hi - lo) * (cheb_nodes(v.size) + 1))
        return np.concatenate(out)

    @property
    def values(self):
        return np.concatenate(self.panel_values)

    def __call__(self, u):
        u = np.asarray(u, complex)
        out = np.zeros(u.shape, complex)
        inside = (u.real >= 0) & (u.real <= self.length)
        if self._rational is not None and inside.any():
            out[inside] = self._rational(u[inside])
        return out

    def panel_eval(self, u):
        """Evaluate the panel polynomials directly (seamless on the axis only)."""
        u = np.asarray(u, complex)
        out = np.zeros(u.shape, complex)
        idx = np.searchsorted(self.breaks, u.real, side="right") - 1
        idx = np.clip(idx, 0, len(self.coeffs) - 1)
        inside = (u.real >= 0) & (u.real <= self.length)
        for j, c in enumerate(self.coeffs):
            m = inside & (idx == j)
            if np.any(m):
                lo, hi = self.breaks[j], self.breaks[j + 1]
                out[m] = cheb_eval(c, (2 * u[m] - lo - hi) / (hi - lo))
        return out

    @classmethod
    def build(cls, f, length, n_panel=24, tol=1e-12, min_width=1e-2, max_panels=64,
              width0=1.0):
        """Adaptive construction from panels of width <= width0; f takes a real u >= 0."""
        s = cheb_nodes(n_panel)

        def sample(lo, hi):
            u = lo + 0.5 * (hi - lo) * (s + 1)
            return np.array([f(x) for x in u], complex)

        m = max(int(np.ceil(length / width0)), 1)
        edges = np.linspace(0.0, float(length), m + 1)
        todo = [(lo, hi, sample(lo, hi)) for lo, hi in zip(edges[:-1], edges[1:])]
        done = []
        scale = max(max(np.max(np.abs(p[2])) for p in todo), 1e-300)
        while todo:
            lo, hi, v = todo.pop()
            scale = max(scale, np.max(np.abs(v)))
            c = values_to_coeffs(v)
            tail = np.max(np.abs(c[-3:]))
            if tail <= tol * scale or hi - lo < min_width or len(done) + len(todo) >= max_panels:
                done.append((lo, hi, v))
                continue
            mid = 0.5 * (lo + hi)
            todo += [(lo, mid, sample(lo, mid)), (mid, hi, sample(mid, hi))]
        done.sort(key=lambda p: p[0])
        return cls([p[0] for p in done] + [done[-1][1]], [p[2] for p in done])

    @classmethod
    def zero(cls, length=1.0, n=2):
        return cls([0.0, length], [np.zeros(n, complex)])

    def to_dict(self):
        return {"breaks": self.breaks.tolist(),
                "panels": [[[z.real, z.imag] for z in v] for v in self.panel_values]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["breaks"], [np.array([complex(a, b) for a, b in v]) for v in d["panels"]])


@dataclass
class ScatteringData:
    r_real: AxisInterp
    r_imag: AxisInterp
    quartets: list = field(default_factory=list)
    norming: list = field(default_factory=list)
    variant: int = 3
    a_hat: float = 0.1
    n1: int = 0
    label: str = ""
    reflectionless: bool = False

    def r(self, k, reach=1.0):
        """Reflection coefficient, continued off R u iR from the nearer axis.

        Points farther than `reach` from both axes get r = 0; the jumps using
        them carry exponentially small factors there.
        """
        k = np.asarray(k, complex)
        near_real = np.abs(k.real) >= np.abs(k.imag)
        out = np.zeros(k.shape, complex)
        if self.reflectionless:
            return out
        far = np.minimum(np.abs(k.real), np.abs(k.imag)) > reach
        k = np.where(far, 0, k)
        sgn = np.where(k.real >= 0, 1.0, -1.0)
        kr = k[near_real]
        out[near_real] = sgn[near_real] * self.r_real(sgn[near_real] * kr)
        sgi = np.where(k.imag >= 0, 1.0, -1.0)
        ki = k[~near_real]
        # k = i y on the upper axis, r(-k) = -r(k)
        out[~near_real] = sgi[~near_real] * self.r_imag(-1j * sgi[~near_real] * ki)
        return np.where(far, 0, out)

    def rt(self, k, reach=1.0):
        """r~(k) = -conj(r(conj k))."""
        k = np.asarray(k, complex)
        return -np.conj(self.r(np.conj(k), reach))

    def singularities(self, rel=1e-8):
        """Poles of the continued r (both axes, all four half-axes by oddness).

        Only poles whose residue exceeds rel * max|r| count; the rest are
        numerically cancelled pole-zero pairs.
        """
        out = []
        if self.reflectionless:
            return np.array(out, complex)
        for ax, unit in ((self.r_real, 1.0), (self.r_imag, 1j)):
            fit = ax._rational
            if fit is None:
                continue
            p, res = fit.poles(), fit.residues()
            p = p[np.abs(res) > rel * np.max(np.abs(ax.values))]
            out += list(unit * p) + list(-unit * p)
        return np.array(out, complex)

    @property
    def kappas(self):
        return [q.kappa for q in self.quartets]

    def is_trivial(self):
        return self.reflectionless and not self.quartets

    def validate(self):
        if len(self.norming) != len(self.quartets):
            raise ScatteringError("corrupt-scattering-data: norming/quartet count mismatch")
        if abs(self.r(0.0)) > 1e-8:
            raise ScatteringError("corrupt-scattering-data: r(0) = %.3g" % abs(self.r(0.0)))
        for qt in self.quartets:
            k = qt.kappa
            if not (k.real > 0 and k.imag > 0):
                raise ScatteringError("corrupt-scattering-data: quartet representative %s "
                                      "not in the first quadrant" % k)
        y = self.r_imag.nodes
        if np.any(1 - np.abs(self.r_imag(y)) ** 2 <= 0):
            raise ScatteringError("corrupt-scattering-data: 1 - |r|^2 <= 0 on iR")
        return self

    def to_dict(self):
        return {"variant": self.variant, "a_hat": self.a_hat, "n1": self.n1,
                "label": self.label, "reflectionless": bool(self.reflectionless),
                "r_real": self.r_real.to_dict(), "r_imag": self.r_imag.to_dict(),
                "quartets": [{"kappa": [q.kappa.real, q.kappa.imag], "residual": q.residual}
                             for q in self.quartets],
                "norming": [[c.real, c.imag] for c in self.norming]}

    @classmethod
    def from_dict(cls, d):
        return cls(AxisInterp.from_dict(d["r_real"]), AxisInterp.from_dict(d["r_imag"]),
                   [EigenQuartet(complex(*q["kappa"]), q["residual"]) for q in d["quartets"]],
                   [complex(*c) for c in d["norming"]], d["variant"], d["a_hat"], d["n1"],
                   d.get("label", ""), d.get("reflectionless", False)).validate()

    def save(self, path):
        import json
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path):
        import json
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _cutoff(f, floor, k_max, step=0.5):
    """Smallest K with |f| < floor on the scan grid beyond K (at least 1)."""
    ks = np.arange(step, k_max + step / 2, step)
    vals = np.array([abs(f(k)) for k in ks])
    above = np.nonzero(vals >= floor)[0]
    if above.size == 0:
        return 1.0
    return float(min(max(ks[above[-1]] + step, 1.0), k_max))


def scattering_data(pot, cfg=ScatterConfig()):
    """Reflection coefficient on both axes, eigenvalue quartets and norming constants."""
    n1, ah = cfg.n1_r, cfg.a_hat
    grids = {side: _halfline_grid(pot, side, n1, ah) for side in ("left", "right")}

    def refl(k):
        m1 = mu_halfline(pot, k, "left", n1, ah, _grid=grids["left"])
        m2 = mu_halfline(pot, k, "right", n1, ah, _grid=grids["right"])
        a = m1[0, 0] * m2[1, 1] - m1[1, 0] * m2[0, 1]
        b = m1[1, 1] * m2[0, 1] - m1[0, 1] * m2[1, 1]
        if abs(a) < 1e-12:
            raise NearZeroDenominator("|a(k)| = %.3g at k=%s" % (abs(a), k))
        return b / a

    axes = []
    for unit in (1.0, 1j):
        f = lambda u, unit=unit: refl(unit * u) if u > 0 else 0.0
        L = _cutoff(f, cfg.r_floor, cfg.k_max)
        axes.append(AxisInterp.build(f, L, cfg.n_panel, cfg.r_tol))
    rmax = max(np.max(np.abs(ax.values)) for ax in axes)
    reflectionless = rmax < cfg.reflectionless_tol
    rr, ri = axes

    quartets, norming = [], []
    if cfg.find_eigenvalues:
        quartets = discrete_eigenvalues(pot, cfg.n1_eig, ah, cfg.axis_tol, cfg.a_tol,
                                        verify_n1=cfg.n1_norm)
        for qt in quartets:
            norming.append(norming_constant(pot, qt.kappa, cfg.n1_norm, ah, cfg.n_seg))
    sd = ScatteringData(rr, ri, quartets, norming, pot.variant, ah, n1, pot.label,
                        reflectionless)
    return sd.validate()
