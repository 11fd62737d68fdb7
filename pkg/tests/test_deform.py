import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from dnls_nist import deform as df
from dnls_nist import potentials as P
from dnls_nist.phase import PhaseParams
from dnls_nist.rhp import extract_q, solve_rhp
from dnls_nist.scattering import ScatterConfig, scattering_data


@pytest.fixture(scope="module")
def sd_g15():
    return scattering_data(P.gauss(1.5), ScatterConfig(find_eigenvalues=False))


@given(st.floats(-3, 3), st.floats(-0.3, 0.3), st.floats(-3, 3), st.floats(0, 2))
def test_factorizations(sd_gs, u, v, x, t):
    k = np.array([complex(u, v), complex(v, u)])
    jf = df.jump_factors(sd_gs, k, PhaseParams(x, t))
    T = jf.T
    assert np.abs(jf.L @ jf.U - T).max() <= 1e-12 * max(1, np.abs(T).max())
    assert np.abs(jf.A @ jf.B @ jf.C - T).max() <= 1e-12 * max(1, np.abs(T).max())


def test_sector_factors_are_unimodular(sd_gs):
    jf = df.jump_factors(sd_gs, np.array([0.5 + 0.1j, 1.2 - 0.05j, 0.1 + 0.8j]), PhaseParams(1.0, 0.7))
    for name in ("I", "U-1", "L", "A", "C-1", "W:T"):
        assert np.allclose(np.linalg.det(jf.sector(name)), 1, atol=1e-12)


def test_delta_matches_quadrature(sd_g15):
    # support (0, -inf) on the real axis, k = 2i
    dl = df.DeltaFunction(sd_g15, 0, -np.inf)
    f = lambda s: np.log(1 - sd_g15.r(s) * sd_g15.rt(s))
    k = 2j

    def integrand(s, part):
        v = f(-s) / (-s - k) * (-1)  # ds along the support runs towards -inf
        return v.real if part == 0 else v.imag

    L = sd_g15.r_real.length
    val = sum(quad(integrand, 0, L, args=(p,), epsabs=1e-14, limit=200)[0] * w
              for p, w in ((0, 1), (1, 1j)))
    assert abs(dl.log(k) - val / (2j * np.pi)) < 1e-8


def test_delta_tends_to_one(sd_g15):
    dl = df.DeltaFunction(sd_g15, 0, np.inf)
    assert abs(dl(1e6j) - 1) < 1e-5
    assert abs(dl(-1e6 + 1e5j) - 1) < 1e-5


def test_delta_jump_on_support(sd_g15):
    # the + side is the left of the oriented support: delta_+ = delta_- (1 - r r~)
    dl = df.DeltaFunction(sd_g15, 0, np.inf)
    k = np.array([0.4, 1.1])
    dp = dl(k, approach=np.full(2, 1j))
    dm = dl(k, approach=np.full(2, -1j))
    assert np.allclose(dp, dm * (1 - sd_g15.r(k) * sd_g15.rt(k)), atol=1e-10)


def test_circle_invariants(sd_gi):
    circles = df.pole_to_jump(sd_gi, PhaseParams(0.0, 1.0))
    assert len(circles) == 4
    centers = [c.center for c in circles]
    for c in circles:
        assert c.radius < min(abs(c.center.real), abs(c.center.imag)) / 2
        others = [abs(c.center - z) for z in centers if z != c.center]
        assert c.radius < min(others) / 2
    assert [c.ccw for c in circles] == [True, False, False, True]


def test_residue_coefficients(sd_gi):
    p = PhaseParams(0.3, 0.2)
    circles = df.pole_to_jump(sd_gi, p)
    C = sd_gi.norming[0]
    kap = sd_gi.quartets[0].kappa
    th = lambda k: k * k * p.x + 2 * k ** 4 * p.t
    assert abs(circles[0].coef - C * np.exp(-2j * th(kap))) < 1e-12
    assert abs(circles[1].coef + np.conj(C) * np.exp(2j * th(np.conj(kap)))) < 1e-12


def test_k_conjugation_does_not_change_the_field(sd_gi):
    p = PhaseParams(0.8, 0.4)
    qs = []
    for force in (False, True):
        prob = df.build_rhp(sd_gi, p, df.DeformConfig(force_k=force))
        assert ("N4" in prob.level) == force
        qs.append(extract_q(solve_rhp(prob, 32)))
    assert abs(qs[0] - qs[1]) < 1e-10
    assert abs(qs[0] - P.soliton_gi(p.x, p.t)) < 1e-10


@pytest.mark.parametrize("x,t,level", [
    (0.0, 0.0, "RHP 0"), (0.0, 1.0, "RHP I"), (-10.0, 1.0, "RHP II"), (10.0, 1.0, "RHP III"),
    (0.0, 5.0, "RHP IV"), (-30.0, 5.0, "RHP V"), (30.0, 5.0, "RHP VI")])
def test_levels(sd_gs, x, t, level):
    prob = df.build_rhp(sd_gs, PhaseParams(x, t))
    assert prob.level == level
    assert prob.b_removed == (t >= 2)


def test_soliton_levels_carry_circle_suffix(sd_gi):
    assert df.build_rhp(sd_gi, PhaseParams(0.0, 0.0)).level == "RHP 0 / N"
    assert df.build_rhp(sd_gi, PhaseParams(2.0, 5.0)).level == "RHP IV / N4"


def test_arcs_come_in_mirror_pairs(sd_gs):
    prob = df.build_rhp(sd_gs, PhaseParams(-5.0, 1.0))
    arcs = prob.arcs
    for a in arcs:
        assert sum(b.arc.is_mirror_of(a.arc) for b in arcs) == 1


def test_every_arc_has_one_jump(sd_gs):
    prob = df.build_rhp(sd_gs, PhaseParams(3.0, 2.5))
    for a in prob.arcs:
        s = np.array([-0.5, 0.0, 0.5])
        G = prob.jump(a, a.arc(s))
        assert G.shape == (3, 2, 2) and np.all(np.isfinite(G))
        assert np.allclose(np.linalg.det(G), 1, atol=1e-10)


def test_truncated_rays_are_finite(sd_gs):
    prob = df.build_rhp(sd_gs, PhaseParams(0.0, 5.0))
    for a in prob.arcs:
        assert np.isfinite(a.arc(1.0)) and np.isfinite(a.arc(-1.0))


def test_undeformed_problem_keeps_the_axes(sd_gs):
    prob = df.build_rhp(sd_gs, PhaseParams(0.0, 5.0), df.DeformConfig(undeformed=True))
    assert prob.level == "RHP 0"
    assert sorted(a.label for a in prob.arcs) == sorted(["R+", "R+'", "iR+", "iR+'"])


def test_contour_json(sd_gs):
    d = df.build_rhp(sd_gs, PhaseParams(-10.0, 1.0)).to_dict()
    assert d["level"] == "RHP II" and d["arcs"]
    assert {"label", "left", "right"} <= set(d["arcs"][0])
