"""Periodic Fourier reference solver for iq_t + q_xx - i q^2 conj(q)_x + |q|^4 q / 2 = 0.

In Fourier space the equation reads

    F[q]_t = -i k^2 F[q] + F[q^2 F^{-1}[i k F[conj q]]] + (i/2) F[|q|^4 q],

and the stiff linear part is removed with the integrating factor
v = exp(i k^2 t) F[q], which is then marched with classical RK4.
"""

import csv
from dataclasses import dataclass, replace

import numpy as np
from scipy import fft as sfft


class InstabilityError(RuntimeError):
    def __init__(self, t):
        super().__init__("instability-detected at t=%.6g" % t)
        self.t = t


@dataclass(frozen=True)
class FsmConfig:
    L: float = 40.0
    N: int = 1024
    dt: float = 1e-4
    dealias: bool = False

    def __post_init__(self):
        if self.N < 64 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two, at least 64")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.L > 0:
            raise ValueError("L must be positive")

    def replace(self, **kw):
        return replace(self, **kw)

    @property
    def x(self):
        return -self.L + 2 * self.L * np.arange(self.N) / self.N

    @property
    def k(self):
        return np.fft.fftfreq(self.N, d=2 * self.L / self.N) * 2 * np.pi


@dataclass
class FsmState:
    t: float
    q: np.ndarray

    def mass(self, cfg):
        return float(np.sum(np.abs(self.q) ** 2) * 2 * cfg.L / cfg.N)


def _mask(cfg):
    if not cfg.dealias:
        return None
    k = np.abs(cfg.k)
    return k <= (2.0 / 3.0) * np.max(k)


class _Kernel:
    def __init__(self, cfg):
        self.ik = 1j * cfg.k
        self.neg = (-np.arange(cfg.N)) % cfg.N
        self.mask = _mask(cfg)


def nonlinear(qhat, cfg, mask=None, _kern=None):
    """Fourier transform of the nonlinear terms q^2 conj(q)_x + (i/2)|q|^4 q."""
    kern = _kern or _Kernel(cfg)
    q = sfft.ifft(qhat)
    # F[conj q](k) = conj(F[q](-k)), so conj(q)_x costs one inverse transform
    qbx = sfft.ifft(kern.ik * np.conj(qhat[kern.neg]))
    m2 = q.real ** 2 + q.imag ** 2
    out = sfft.fft(q * (q * qbx + 0.5j * m2 * m2))
    if mask is not None:
        out = out * mask
    return out


def fsm_rhs(state, cfg):
    """d/dt of exp(i k^2 t) F[q] at the given state."""
    q = np.asarray(state.q, complex)
    if q.shape != (cfg.N,):
        raise ValueError("state has %d samples, expected %d" % (q.size, cfg.N))
    out = np.exp(1j * cfg.k ** 2 * state.t) * nonlinear(np.fft.fft(q), cfg, _mask(cfg))
    if not np.all(np.isfinite(out)):
        raise InstabilityError(state.t)
    return out


def fsm_evolve(q0, cfg=FsmConfig(), t_end=1.0, snapshots=()):
    """RK4 march of the integrating-factor variable from t = 0 to t_end.

    q0 is either a callable of x or samples on cfg.x. Returns the final state
    and, if requested, a list of states at the snapshot times (rounded to steps).
    """
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    q = q0(cfg.x) if callable(q0) else q0
    q = np.array(q, dtype=complex)
    if q.shape != (cfg.N,):
        raise ValueError("initial profile has %d samples, expected %d" % (q.size, cfg.N))
    nsteps = int(round(t_end / cfg.dt))
    h = t_end / nsteps if nsteps else 0.0
    k2 = cfg.k ** 2
    mask = _mask(cfg)
    kern = _Kernel(cfg)

    def nl(v):
        with np.errstate(over="ignore", invalid="ignore"):  # blow-up is caught in the loop
            return nonlinear(v, cfg, mask, kern)

    # stepping v in a frame reset every step: v(t_n) = F[q(t_n)], E(s) = exp(-i k^2 s)
    Eh, Eh2 = np.exp(-1j * k2 * h), np.exp(-1j * k2 * h / 2)
    Ehc, Eh2c = Eh.conj(), Eh2.conj()
    snap_steps = {int(round(s / h)) if h else 0: s for s in snapshots}
    snaps = []
    qhat = np.fft.fft(q)
    if 0 in snap_steps:
        snaps.append(FsmState(0.0, q.copy()))
    for n in range(nsteps):
        a = nl(qhat)
        b = Eh2c * nl(Eh2 * (qhat + 0.5 * h * a))
        c = Eh2c * nl(Eh2 * (qhat + 0.5 * h * b))
        d = Ehc * nl(Eh * (qhat + h * c))
        qhat = Eh * (qhat + h / 6 * (a + 2 * b + 2 * c + d))
        if (n % 64 == 63 or n + 1 == nsteps) and not np.max(np.abs(qhat)) < 1e8 * cfg.N:
            raise InstabilityError((n + 1) * h)
        if n + 1 in snap_steps:
            snaps.append(FsmState((n + 1) * h, np.fft.ifft(qhat)))
    final = FsmState(nsteps * h, np.fft.ifft(qhat))
    return (final, snaps) if snapshots else final


def interpolate(state, cfg, x):
    """Trigonometric interpolant of the periodic state at arbitrary x."""
    x = np.asarray(x, float)
    c = np.fft.fft(state.q) / cfg.N
    return np.exp(1j * np.multiply.outer(x + cfg.L, cfg.k)) @ c


SNAPSHOT_FIELDS = ["x", "t", "re_q", "im_q", "abs_q"]


def write_snapshots(states, cfg, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SNAPSHOT_FIELDS)
        for s in states:
            for x, q in zip(cfg.x, s.q):
                w.writerow([repr(float(v)) for v in (x, s.t, q.real, q.imag, abs(q))])


def read_snapshots(path):
    """{t: (x, q)} from a snapshot CSV."""
    rows = {}
    with open(path) as fh:
        for r in csv.DictReader(fh):
            rows.setdefault(float(r["t"]), []).append(
                (float(r["x"]), complex(float(r["re_q"]), float(r["im_q"]))))
    return {t: (np.array([a for a, _ in v]), np.array([b for _, b in v])) for t, v in rows.items()}
