import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcx import _fallback, kernels
from qcx.oracle import quad
from conftest import random_pl, random_points


def _tables(h):
    return h.bt, h.bh, h.slopes


def test_backend_flag_matches_loaded_module():
    assert kernels.BACKEND in kernels.backends()
    assert kernels.pl_eval is kernels.backends()[kernels.BACKEND].pl_eval


def test_eval_matches_interp(backend, rng):
    h = random_pl(rng)
    t = np.linspace(h.bt[0], h.bt[-1], 301)
    np.testing.assert_allclose(backend.pl_eval(*_tables(h), t), np.interp(t, h.bt, h.bh),
                               rtol=0, atol=1e-12)


def test_tails_affine(backend):
    h = random_pl(np.random.default_rng(3))
    t = np.array([h.bt[0] - 2.0, h.bt[-1] + 3.0])
    got = backend.pl_eval(*_tables(h), t)
    assert got[0] == pytest.approx(h.bh[0] - 2.0 * h.left_slope, abs=1e-12)
    assert got[1] == pytest.approx(h.bh[-1] + 3.0 * h.right_slope, abs=1e-12)


def test_backends_agree(rng):
    impls = kernels.backends()
    if len(impls) < 2:
        pytest.skip("compiled backend not built")
    for _ in range(20):
        h = random_pl(rng)
        x, y = random_points(rng, 200)
        ref = _fallback.pl_increments(*_tables(h), x, y)
        got = impls["cython"].pl_increments(*_tables(h), x, y)
        for a, b in zip(ref, got):
            np.testing.assert_allclose(b, a, rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(impls["cython"].pl_rho(*_tables(h), x, y),
                                   _fallback.pl_rho(*_tables(h), x, y), rtol=1e-13)
        for a, b in zip(_fallback.pl_segment_averages(*_tables(h), x, y),
                        impls["cython"].pl_segment_averages(*_tables(h), x, y)):
            np.testing.assert_allclose(b, a, rtol=1e-12)


def test_increments_against_antiderivative(backend, rng):
    h = random_pl(rng)
    x, y = random_points(rng, 100)
    dp, dm, ip, im = backend.pl_increments(*_tables(h), x, y)
    hx = h(x)
    np.testing.assert_allclose(dp, h(x + y) - hx, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(dm, hx - h(x - y), rtol=1e-12, atol=1e-13)
    for k in range(0, 100, 7):
        a, b, c = x[k] - y[k], x[k], x[k] + y[k]
        right = quad(lambda t: float(h(t)) - hx[k], b, c, h.bt) / y[k]
        left = quad(lambda t: hx[k] - float(h(t)), a, b, h.bt) / y[k]
        assert ip[k] == pytest.approx(right, rel=1e-10, abs=1e-13)
        assert im[k] == pytest.approx(left, rel=1e-10, abs=1e-13)


@settings(max_examples=200, deadline=None)
@given(st.floats(-0.09, 0.09))
def test_log1p_ratio_series_matches_direct(eps):
    phi, psi = kernels.log1p_ratio(np.array([eps]))
    if abs(eps) > 1e-4:
        assert phi[0] == pytest.approx(np.log1p(eps) / eps, rel=1e-12)
        assert psi[0] == pytest.approx((1 - np.log1p(eps) / eps) / eps, rel=1e-8)
    else:
        assert phi[0] == pytest.approx(1 - eps / 2, abs=1e-8)
        assert psi[0] == pytest.approx(0.5 - eps / 3, abs=1e-8)


def test_log1p_ratio_continuous_at_cut():
    e = np.array([0.1 - 1e-12, 0.1 + 1e-12, -0.1 + 1e-12, -0.1 - 1e-12])
    phi, psi = kernels.log1p_ratio(e)
    assert abs(phi[0] - phi[1]) < 5e-12 and abs(phi[2] - phi[3]) < 5e-12
    assert abs(psi[0] - psi[1]) < 1e-10 and abs(psi[2] - psi[3]) < 1e-10


def test_ratio_integral_exact():
    # int_0^2 (1 + t) / (2 + 3 t) dt
    got = kernels.ratio_integral(np.array([1.0]), np.array([2.0]), np.array([3.0]),
                                 np.array([8.0]), np.array([2.0]))
    want = 2 / 3 + (1 / 9) * np.log(4.0)
    assert got[0] == pytest.approx(want, rel=1e-14)
