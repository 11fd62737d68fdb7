import numpy as np
import pytest
from hypothesis import given, strategies as st

from dnls_nist.phase import (ContourError, PhaseParams, build_skeleton,
                             classify_region, default_disk_radius, dtheta, re_i_theta,
                             re_i_theta_sign, saddle_points, sector_at, theta)

from oracles import factor_sizes

finite = dict(allow_nan=False, allow_infinity=False)


def test_theta_values():
    p = PhaseParams(1.5, 0.25)
    assert theta(2.0, p) == 4 * 1.5 + 2 * 16 * 0.25
    assert abs(theta(1j, p) - (-1.5 + 0.5)) < 1e-15


@given(st.complex_numbers(max_magnitude=3, **finite), st.floats(-5, 5), st.floats(0, 5))
def test_re_i_theta_product_formula(k, x, t):
    p = PhaseParams(x, t)
    direct = np.real(1j * theta(k, p))
    assert abs(re_i_theta(k, p) - direct) <= 1e-10 * (1 + abs(direct))


def test_sign_field_vanishes_on_axes():
    p = PhaseParams(-2.0, 1.0)
    k = np.array([0.3, 2.0, -1.1, 0.7j, -3j])
    assert np.all(re_i_theta_sign(k, p) == 0)
    assert re_i_theta_sign(0.5 + 0.5j, p) == np.sign(re_i_theta(0.5 + 0.5j, p))


@pytest.mark.parametrize("x,t,where", [(-4.0, 1.0, "real"), (4.0, 1.0, "imag"), (0.0, 2.0, "zero")])
def test_saddles(x, t, where):
    p = PhaseParams(x, t)
    S = saddle_points(p)
    for k in S.saddles:
        assert abs(dtheta(k, p)) < 1e-12
    if where == "real":
        assert S.k1 == 1.0
    elif where == "imag":
        assert S.k1 == 1j
    else:
        assert S.k1 is None and S.saddles == (0j,)


@given(st.floats(-50, 50), st.floats(0.01, 50))
def test_regions_partition(x, t):
    tag = classify_region(PhaseParams(x, t))
    b = 4 * np.sqrt(t)
    expect = "R2" if x < -b else ("R3" if x > b else "R1")
    assert tag.region == expect


def test_bad_parameters():
    with pytest.raises(ValueError):
        PhaseParams(0.0, -1.0)
    with pytest.raises(ValueError):
        classify_region(PhaseParams(0.0, 1.0), c1=0)
    with pytest.raises(ValueError):
        build_skeleton(classify_region(PhaseParams(0.0, 1.0)), PhaseParams(0.0, 1.0), arm_slope=1.5)


@pytest.mark.parametrize("x,t", [(0.0, 1.0), (-10.0, 1.0), (10.0, 1.0), (-30.0, 5.0)])
def test_skeleton_labels_unique_and_mirrored(x, t):
    p = PhaseParams(x, t)
    tag = classify_region(p)
    rho = None if tag.region == "R1" else default_disk_radius(saddle_points(p).k1, p)
    sk = build_skeleton(tag, p, disk_radius=rho)
    labels = sk.labels()
    assert len(labels) == len(set(labels))
    for a in sk.arcs:
        if a.label.endswith("'"):
            base = next(b for b in sk.arcs if b.label == a.label[:-1])
            assert a.arc.is_mirror_of(base.arc)


@pytest.mark.parametrize("x,t", [(-10.0, 1.0), (10.0, 1.0)])
def test_arcs_meet_only_at_saddles_or_disks(x, t):
    p = PhaseParams(x, t)
    k1 = saddle_points(p).k1
    rho = default_disk_radius(k1, p)
    sk = build_skeleton(classify_region(p), p, disk_radius=rho)
    ends = []
    for a in sk.arcs:
        for s in (-1.0, 1.0):
            z = complex(a.arc(s))
            if np.isfinite(z):
                ends.append(z)
    for z in ends:
        on_disk = min(abs(abs(z - c) - r) for c, r in sk.disks) < 1e-12
        apex_or_origin = abs(z) < 1e-12 or any(
            abs(z - complex(b.arc(1.0))) < 1e-12 and abs(z - complex(b2.arc(-1.0))) < 1e-12
            for b in sk.arcs for b2 in sk.arcs if b is not b2)
        assert on_disk or apex_or_origin


def test_sector_lookup_region1():
    p = PhaseParams(0.0, 1.0)
    sk = build_skeleton(classify_region(p), p)
    # between the real axis and the lower-slope arm above it lives C-1
    assert sector_at(sk, complex(2.0, 0.05)) == "C-1"
    assert sector_at(sk, complex(2.0, 1.0)) == "I"
    assert sector_at(sk, complex(2.0, -0.05)) == "A"
    assert sector_at(sk, complex(0.05, 2.0)) == "U-1"
    assert sector_at(sk, complex(-0.05, 2.0)) == "L"


@given(st.floats(-1, 1), st.floats(0.05, 200))
def test_region1_factors_bounded(u, t):
    x = 4 * np.sqrt(t) * u
    p = PhaseParams(x, t)
    sk = build_skeleton(classify_region(p), p, arm_slope=0.1)
    assert factor_sizes(sk, p).max() <= np.exp(40 / 99) + 1e-9


def test_region1_bound_is_attained_at_the_edge():
    # the arm at slope 1/10 passes through the maximum 2 tan(2 alpha) = 40/99 when x = -4 sqrt(t)
    t = 3.0
    p = PhaseParams(-4 * np.sqrt(t), t)
    alpha = np.arctan(0.1)
    rho = np.sqrt(np.sqrt(t) * np.sin(2 * alpha) / (t * np.sin(4 * alpha)))
    k = rho * np.exp(1j * alpha)
    assert abs(-2 * np.imag(theta(k, p)) - 40 / 99) < 1e-12


def test_region2_requires_real_saddle():
    p = PhaseParams(1.0, 1.0)
    with pytest.raises(ContourError):
        build_skeleton(classify_region(PhaseParams(-10.0, 1.0)), p, disk_radius=0.1)
