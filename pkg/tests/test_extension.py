import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcx import boundary_map as bm
from qcx.errors import ConsistencyError
from qcx.extension import (dilatation_from_trace, disk_to_strip, extend, extend_circle, jet,
                           jet_from_increments, local_increments, strip_to_disk)
from conftest import random_pl, random_points


def test_identity_extension():
    x = np.linspace(-3, 3, 11)
    y = np.linspace(0.01, 4, 11)
    u, v = extend(bm.identity(), x, y)
    np.testing.assert_allclose(u, x, atol=1e-14)
    np.testing.assert_allclose(v, y / 2, atol=1e-14)
    j = jet(bm.identity(), x, y)
    np.testing.assert_allclose(j.dilatation_K, 2.0, atol=1e-13)
    np.testing.assert_allclose(j.jacobian, 0.5, atol=1e-14)


def test_two_slope_golden_partials(goldens):
    g = goldens["two_slope_2_at_0_1"]
    j = jet(bm.two_slope(2.0), 0.0, 1.0)
    for key in ("u_x", "u_y", "v_x", "v_y"):
        assert getattr(j, key) == pytest.approx(g[key], abs=1e-9)
    assert j.trace_T == pytest.approx(g["trace_T"], abs=1e-12)
    assert j.dilatation_K == pytest.approx(g["dilatation_K"], abs=1e-12)


def test_scalar_and_shape():
    h = bm.two_slope(3.0)
    u, v = extend(h, 0.5, 2.0)
    assert isinstance(u, float) and isinstance(v, float)
    j = jet(h, np.zeros((2, 3)), np.ones((2, 3)))
    assert j.dilatation_K.shape == (2, 3)


def test_rejects_boundary_points():
    with pytest.raises(ValueError):
        extend(bm.identity(), 0.0, 0.0)


def test_degenerate_increments_are_inconsistent():
    # I+ + I- = d+ + d- forces v_y = 0 and hence J = 0
    one = np.array([1.0])
    with pytest.raises(ConsistencyError):
        jet_from_increments(one, one, one, one, one)


def test_dilatation_from_trace():
    assert dilatation_from_trace(2.0) == 1.0
    assert dilatation_from_trace(1.999999) == 1.0
    K = dilatation_from_trace(np.array([2.5, 10.0]))
    np.testing.assert_allclose(K + 1 / K, [2.5, 10.0], rtol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_jet_trace_at_least_two(seed):
    rng = np.random.default_rng(seed)
    h = random_pl(rng)
    x, y = random_points(rng, 200)
    j = jet(h, x, y)
    assert np.all(j.trace_T >= 2.0 - 1e-12)
    assert np.all(j.jacobian > 0)
    assert np.all(j.dilatation_K >= 1.0)


def test_generic_map_matches_pl_increments():
    # power(1) takes the PL path; compare a generic map against quadrature
    h = bm.power(0.5)
    x, y = np.array([0.3, -1.0, 2.0]), np.array([0.5, 2.5, 0.1])
    dp, dm, ip, im = local_increments(h, x, y)
    from qcx.oracle import quad
    for k in range(3):
        hx = float(h(x[k]))
        want = quad(lambda t: float(h(t)) - hx, x[k], x[k] + y[k], [0.0]) / y[k]
        assert ip[k] == pytest.approx(want, rel=1e-11)


def test_strip_disk_round_trip():
    rng = np.random.default_rng(1)
    x = rng.uniform(0, 1, 100)
    y = rng.uniform(0.01, 2, 100)
    xb, yb = disk_to_strip(strip_to_disk(x, y))
    np.testing.assert_allclose(np.exp(2j * np.pi * xb), np.exp(2j * np.pi * x), atol=1e-12)
    np.testing.assert_allclose(yb, y, rtol=1e-12)


def test_rotation_extension_is_rotation():
    ch = bm.rotation(0.7)
    rng = np.random.default_rng(2)
    z = 0.9 * np.sqrt(rng.uniform(0, 1, 50)) * np.exp(2j * np.pi * rng.uniform(0, 1, 50))
    w = extend_circle(ch, z)
    # the lift is the identity, whose extension is (x, y/2): radii are square roots
    np.testing.assert_allclose(np.abs(w), np.sqrt(np.abs(z)), rtol=1e-12)
    np.testing.assert_allclose(np.angle(w / z), 0.7, atol=1e-12)
    assert extend_circle(ch, 0j) == 0


def test_lift_extension_commutes_with_translation():
    ch = bm.circle_from_function(lambda th: th + 0.4 * np.sin(th), 40)
    rng = np.random.default_rng(4)
    x, y = rng.uniform(-2, 2, 100), rng.uniform(0.001, 3, 100)
    u0, v0 = extend(ch.lift, x, y)
    u1, v1 = extend(ch.lift, x + 1.0, y)
    np.testing.assert_allclose(u1 - u0, 1.0, atol=1e-12)
    np.testing.assert_allclose(v1, v0, atol=1e-12)
