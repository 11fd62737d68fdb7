import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dnls_nist import potentials as P
from dnls_nist.scattering import (AxisInterp, ScatterConfig, ScatteringData, ScatteringError,
                                  a_coefficient, a_prime, b_at_eigenvalue, discrete_eigenvalues,
                                  mu_halfline, reflection_coefficient, scattering_data,
                                  scattering_matrix)

from oracles import r_ode, reflectionless_q

EPS = np.array([[0, 1], [-1, 0]])
S3 = np.diag([1, -1])
GAUSS = P.gauss(1.5)


def test_gi_quartet(sd_gi):
    assert len(sd_gi.quartets) == 1
    kap = sd_gi.quartets[0].kappa
    assert abs(kap - (1 + 0.5j)) < 1e-10
    members = np.array(sd_gi.quartets[0].members)
    assert np.allclose(members, [kap, kap.conjugate(), -kap.conjugate(), -kap])


def test_small_gaussian_has_no_eigenvalues():
    assert discrete_eigenvalues(P.gauss(0.1), n1=200) == []


def test_gi_is_reflectionless(sd_gi):
    assert sd_gi.reflectionless
    for k in [0.3, -1.1, 2.0, 0.7j, -1.6j]:
        assert abs(sd_gi.r(k)) < 1e-8


def test_a_vanishes_at_gi_eigenvalue():
    assert abs(a_coefficient(P.q_gi(), 1 + 0.5j)) < 1e-8


def test_a_prime_of_injected_polynomial():
    d = a_prime(None, 1 + 1j, a_func=lambda k: k * k)
    assert abs(d - (2 + 2j)) < 1e-10


def test_a_prime_self_converges():
    pot = P.q_gi()
    d24 = a_prime(pot, 1 + 0.5j, n_seg=24)
    d48 = a_prime(pot, 1 + 0.5j, n_seg=48)
    assert abs(d24 - d48) < 1e-8


def test_eigenfunction_columns_are_proportional():
    _, spread = b_at_eigenvalue(P.q_gi(), 1 + 0.5j)
    assert spread < 1e-8


def test_norming_constant_reproduces_soliton(sd_gi):
    kap, C = sd_gi.quartets[0].kappa, sd_gi.norming[0]
    for x, t in [(0.0, 0.5), (1.0, 1.0)]:
        assert abs(reflectionless_q(kap, C, x, t) - P.soliton_gi(x, t)) < 1e-6


@pytest.mark.parametrize("k", [0.5, -1.0, 0.5j, -1j])
def test_reflection_matches_ode(k):
    q = lambda x: 1.5 * np.exp(-x * x)
    assert abs(reflection_coefficient(GAUSS, k) - r_ode(q, k)) < 1e-8


@pytest.mark.parametrize("k", [0.7, -1.3, 0.9j, -0.4j])
def test_jost_symmetries(k):
    for side in ("left", "right"):
        m = mu_halfline(GAUSS, k, side)
        mb = mu_halfline(GAUSS, np.conj(k), side)
        mm = mu_halfline(GAUSS, -k, side)
        assert np.abs(m + EPS @ np.conj(mb) @ EPS).max() < 1e-10
        assert np.abs(m - S3 @ mm @ S3).max() < 1e-10
        assert abs(np.linalg.det(m) - 1) < 1e-10


@given(st.floats(0.05, 3.0), st.booleans(), st.booleans())
def test_scattering_matrix_symmetries(u, imag, neg):
    k = (1j if imag else 1.0) * (-u if neg else u)
    S = scattering_matrix(GAUSS, k, n1=128)
    Sb = scattering_matrix(GAUSS, np.conj(k), n1=128)
    assert abs(np.linalg.det(S) - 1) < 1e-10
    assert abs(S[0, 0] - np.conj(Sb[1, 1])) < 1e-10
    assert abs(S[1, 0] + np.conj(Sb[0, 1])) < 1e-10


def test_reflection_is_odd_and_vanishes_at_zero(sd_gs):
    k = np.array([0.3, 1.1, 2.4, 0.6j, 1.7j])
    assert np.abs(sd_gs.r(-k) + sd_gs.r(k)).max() < 1e-10
    assert abs(sd_gs.r(0.0)) < 1e-8


def test_r_tilde_relation(sd_gs):
    for k in [0.8, 1.2j, 0.75 + 0.1j]:
        assert abs(sd_gs.rt(k) + np.conj(sd_gs.r(np.conj(k)))) < 1e-15


@pytest.mark.parametrize("k", [0.75 + 0.1j, 1 - 0.2j, 1.5 + 0.15j, 0.3 + 0.9j])
def test_off_axis_continuation_matches_ode(sd_gs, k):
    # the resonance of gauss_sech near 0.79 - 0.22i makes this a sharp test
    q = lambda x: np.exp(-x * x) / np.cosh(x)
    assert abs(sd_gs.r(k) - r_ode(q, k)) < 1e-8


def test_rational_fit_has_no_spurious_poles_near_axis(sd_gs):
    fit = sd_gs.r_real._rational
    res, poles = fit.residues(), fit.poles()
    near = (np.abs(poles.imag) < 0.5) & (poles.real > -0.5) & (poles.real < sd_gs.r_real.length + 0.5)
    assert np.all(np.abs(res[near]) > 1e-10 * np.max(np.abs(sd_gs.r_real.values)))


def test_noise_level_samples_fit_to_zero():
    ai = AxisInterp([0.0, 1.0], [1e-16 * np.ones(8)])
    assert ai(0.5 + 0.1j) == 0


def test_json_round_trip(sd_gs, tmp_path):
    path = tmp_path / "sd.json"
    sd_gs.save(path)
    back = ScatteringData.load(path)
    k = np.array([0.4, 1.3, 0.8j, 0.75 + 0.1j])
    assert np.allclose(back.r(k), sd_gs.r(k), rtol=0, atol=1e-14)
    assert back.quartets == sd_gs.quartets
    assert json.loads(path.read_text())["label"] == "gauss_sech"


def test_corrupt_data_names_the_check(sd_gi):
    d = sd_gi.to_dict()
    d["norming"] = []
    with pytest.raises(ScatteringError, match="norming"):
        ScatteringData.from_dict(d)
    d = sd_gi.to_dict()
    d["quartets"][0]["kappa"] = [-1.0, 0.5]
    with pytest.raises(ScatteringError, match="first quadrant"):
        ScatteringData.from_dict(d)


def test_zero_potential(sd_zero):
    assert sd_zero.is_trivial()
    assert sd_zero.r(0.7) == 0 and sd_zero.r(1.1j) == 0


def test_gaussian_profile_data_without_eigenvalues():
    sd = scattering_data(P.gauss(0.5), ScatterConfig(find_eigenvalues=False))
    assert not sd.quartets and not sd.reflectionless
    assert abs(sd.r(0.5) - r_ode(lambda x: 0.5 * np.exp(-x * x), 0.5)) < 1e-8
