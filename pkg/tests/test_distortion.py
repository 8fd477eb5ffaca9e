import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcx import boundary_map as bm
from qcx import distortion as D
from qcx.extension import jet
from qcx.oracle import brute_segment_averages, brute_triple, rho_direct
from conftest import random_pl, random_points


def test_rho_two_slope():
    assert D.rho(bm.two_slope(2.0), 0.0, 1.0) == pytest.approx(2.0, abs=1e-15)
    assert D.rho(bm.two_slope(2.0), 5.0, 1.0) == pytest.approx(1.0, abs=1e-15)


def test_rho_log_singular():
    t = 2.0 ** -np.arange(1, 31)
    np.testing.assert_allclose(D.rho(bm.log_singular(), np.zeros_like(t), t),
                               1.0 + np.log(1.0 / t), rtol=0, atol=1e-12)


def test_rho_matches_direct(rng):
    h = random_pl(rng)
    x, t = random_points(rng, 50)
    got = D.rho(h, x, t)
    for k in range(50):
        assert got[k] == pytest.approx(rho_direct(h, x[k], t[k]), rel=1e-11)


def test_rho_circular_rotation():
    ch = bm.rotation(1.2)
    assert D.rho_circular(ch, 0.4, 0.3) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValueError):
        D.rho_circular(ch, 0.0, 2.0)


def test_segment_average_golden(goldens):
    g = goldens["two_slope_2_at_0_1"]
    s = D.segment_average(bm.two_slope(2.0), 0.0, 1.0)
    assert s.avg_right == pytest.approx(g["avg_right"], abs=1e-12)
    assert s.avg_left == pytest.approx(g["avg_left"], abs=1e-12)
    assert s.avg_left == pytest.approx(4.0 * (0.75 + math.log(0.75)), abs=1e-12)
    assert s.avg_combined == pytest.approx(g["avg_combined"], abs=1e-12)


def test_segment_average_pl_vs_brute(rng):
    for _ in range(5):
        h = random_pl(rng)
        x, y = random_points(rng, 6)
        s = D.segment_average(h, x, y)
        for k in range(6):
            right, left = brute_segment_averages(h, x[k], y[k])
            assert s.avg_right[k] == pytest.approx(right, rel=1e-10)
            assert s.avg_left[k] == pytest.approx(left, rel=1e-10)


def test_segment_average_generic_vs_brute():
    h = bm.log_singular()
    for x, y in [(0.0, 0.5), (0.1, 0.3), (-0.4, 1.2), (0.0, 1e-4)]:
        s = D.segment_average(h, x, y)
        right, left = brute_segment_averages(h, x, y)
        assert s.avg_right == pytest.approx(right, rel=1e-9)
        assert s.avg_left == pytest.approx(left, rel=1e-9)


def test_segment_average_of_identity_func_matches(rng):
    h = bm.log_singular()
    x, y = np.array([0.0, 0.2]), np.array([0.3, 0.7])
    a = D.segment_average_of(h, x, y, lambda r: r)
    np.testing.assert_allclose(a, D.segment_average(h, x, y).avg_combined, rtol=1e-10)


def test_triple_golden(goldens):
    g = goldens["two_slope_2_at_0_1"]
    tr = D.beta_xi_eta(bm.two_slope(2.0), 0.0, 1.0)
    for key in ("beta", "xi", "eta"):
        assert getattr(tr, key) == pytest.approx(g[key], abs=1e-12)
    assert not tr.beta_is_rho
    assert tr.F() == pytest.approx(g["trace_T"], abs=1e-12)


def test_triple_vs_brute():
    h = bm.log_singular()
    for x, y in [(0.0, 0.5), (-0.3, 0.9), (0.2, 0.1)]:
        tr = D.beta_xi_eta(h, x, y)
        b, xi, eta = brute_triple(h, x, y)
        assert (tr.beta, tr.xi, tr.eta) == pytest.approx((b, xi, eta), rel=1e-10)


def test_F_vertex_values():
    # identity: beta = 1, xi = eta = 1/2
    assert D.F_value(1.0, 0.5, 0.5) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        D.F_value(1.0, 0.0, 0.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_F_equals_trace(seed):
    rng = np.random.default_rng(seed)
    h = random_pl(rng)
    x, y = random_points(rng, 1)
    tr = D.beta_xi_eta(h, float(x[0]), float(y[0]))
    assert tr.F() == pytest.approx(jet(h, x[0], y[0]).trace_T, rel=1e-9)


def test_check_bounds_identity():
    rep = D.check_bounds(bm.identity(), np.linspace(-2, 2, 9), np.linspace(0.1, 3, 9))
    assert rep.lower_violations == rep.upper_violations == 0
    assert rep.empirical_max_ratio_lower == pytest.approx(1 / 8)
    assert rep.empirical_max_ratio_upper == pytest.approx(2.0)
    assert set(rep.table) == set(D.BOUNDS_COLUMNS)


def test_check_bounds_log_singular_near_origin():
    x, y = np.meshgrid(np.linspace(-0.5, 0.5, 41), np.geomspace(1e-6, 1.0, 41))
    rep = D.check_bounds(bm.log_singular(), x, y)
    assert rep.points_checked == 41 * 41
    assert rep.lower_violations == rep.upper_violations == 0
