"""Initial profiles and the exact one-soliton of the GI equation."""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

# q1 weight in the Lax pair, Q1 = i w |q|^2 sigma3, per DNLS variant
VARIANT_WEIGHT = {1: 0.0, 2: -0.25, 3: 0.5}


@dataclass(frozen=True)
class PotentialSpec:
    sampler: Callable
    variant: int = 3
    label: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in VARIANT_WEIGHT:
            raise ValueError("variant must be 1, 2 or 3")

    def __call__(self, x):
        q = np.asarray(self.sampler(np.asarray(x, float)), dtype=complex)
        if not np.all(np.isfinite(q)):
            raise ValueError("potential %s returned non-finite samples" % self.label)
        return q

    @property
    def weight(self):
        return VARIANT_WEIGHT[self.variant]

    def is_zero(self):
        return self.params.get("zero", False)


def soliton_gi(x, t, xi=1.0, eta=0.5):
    """Exact one-soliton of iq_t + q_xx - i q^2 conj(q)_x + |q|^4 q / 2 = 0.

    The eigenvalue is xi + i eta. The time coefficient of X is 16 xi eta (xi^2 - eta^2),
    fixed by substituting the formula into the equation (see tests/test_potentials.py).
    """
    if xi * eta == 0:
        raise ValueError("degenerate soliton parameters")
    x = np.asarray(x, float)
    X = -4 * xi * eta * x - 16 * xi * eta * (xi ** 2 - eta ** 2) * t
    Y = 2 * (xi ** 2 - eta ** 2) * x + 4 * (xi ** 4 + eta ** 4 - 6 * xi ** 2 * eta ** 2) * t
    # divide through by exp(|X|) to avoid overflow
    aX = np.abs(X)
    den = (xi + 1j * eta) * np.exp(X - aX) + (xi - 1j * eta) * np.exp(-X - aX)
    return -8 * xi * eta * np.exp(-1j * Y) * np.exp(-aX) / den


def _q_kn(x):
    # conjugate of the textbook KN form 4e^{2x}(e^{4x}+e^{-i pi/2})/(e^{4x}+e^{i pi/2})^2:
    # with Q = [[0, q], [-conj q, 0]] it is this profile that carries the
    # eigenvalue e^{i pi/4} (it is the gauge image of the GI soliton)
    x = np.asarray(x, float)
    out = np.empty(x.shape, complex)
    pos = x > 0
    e = np.exp(-4 * x[pos])
    out[pos] = 4 * np.exp(-2 * x[pos]) * (1 - 1j * e) / (1 + 1j * e) ** 2
    e = np.exp(4 * x[~pos])
    out[~pos] = 4 * np.exp(2 * x[~pos]) * (e - 1j) / (e + 1j) ** 2
    return out.conj()


def _gauss_sech(x):
    return np.exp(-x ** 2) / np.cosh(x)


def q_kn():
    """Kaup-Newell one-soliton initial value, eigenvalue (1+i)/sqrt(2)."""
    return PotentialSpec(_q_kn, variant=1, label="q_kn")


def q_gi(xi=1.0, eta=0.5):
    return PotentialSpec(lambda x: soliton_gi(x, 0.0, xi, eta), variant=3, label="q_gi",
                         params={"xi": xi, "eta": eta})


def gauss(A):
    return PotentialSpec(lambda x: A * np.exp(-x ** 2) + 0j, variant=3, label="gauss:%g" % A,
                         params={"A": A})


def gauss_sech():
    return PotentialSpec(_gauss_sech, variant=3, label="gauss_sech")


def zero():
    return PotentialSpec(lambda x: np.zeros_like(x, dtype=complex), variant=3, label="zero",
                         params={"zero": True})


def from_samples(x, q, variant=3, label="file"):
    """Profile from tabulated samples (cubic interpolation, zero outside)."""
    from scipy.interpolate import CubicSpline

    x = np.asarray(x, float)
    q = np.asarray(q, complex)
    re, im = CubicSpline(x, q.real), CubicSpline(x, q.imag)

    def f(y):
        y = np.asarray(y, float)
        inside = (y >= x[0]) & (y <= x[-1])
        out = np.zeros(y.shape, complex)
        out[inside] = re(y[inside]) + 1j * im(y[inside])
        return out

    return PotentialSpec(f, variant=variant, label=label)


def builtin(name):
    """Resolve a profile name: q_kn, q_gi, gauss:A, gauss_sech, zero."""
    if name == "q_kn":
        return q_kn()
    if name == "q_gi":
        return q_gi()
    if name == "gauss_sech":
        return gauss_sech()
    if name == "zero":
        return zero()
    if name.startswith("gauss:"):
        return gauss(float(name.split(":", 1)[1]))
    raise KeyError("unknown profile %r" % name)
