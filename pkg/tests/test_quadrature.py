import math

import numpy as np
import pytest

from qcx.errors import QuadratureError
from qcx.quadrature import (adaptive_cubature, adaptive_gk, adaptive_gk_batch, composite_gauss,
                            gauss_legendre)


def test_gauss_legendre_exact_for_polynomials():
    t, w = gauss_legendre(6)
    for k in range(12):
        want = 0.0 if k % 2 else 2.0 / (k + 1)
        assert float(w @ t ** k) == pytest.approx(want, abs=1e-14)


def test_adaptive_gk_smooth_and_singular():
    val, err = adaptive_gk(np.exp, 0.0, 1.0, atol=1e-13, rtol=1e-13)
    assert val == pytest.approx(math.e - 1, abs=1e-13)
    val, _ = adaptive_gk(lambda t: np.log(t), 0.0, 1.0, atol=1e-11, rtol=1e-11)
    assert val == pytest.approx(-1.0, abs=1e-10)


def test_adaptive_gk_batch_owners():
    lo = np.array([0.0, 0.0, 1.0])
    hi = np.array([1.0, math.pi, 2.0])
    owner = np.arange(3)
    freq = np.array([1.0, 1.0, 2.0])
    vals, errs = adaptive_gk_batch(lambda own, t: np.sin(freq[own] * t), lo, hi, owner, 3,
                                   atol=1e-13, rtol=1e-13)
    want = [1 - math.cos(1.0), 2.0, (math.cos(2.0) - math.cos(4.0)) / 2]
    np.testing.assert_allclose(vals, want, atol=1e-12)


def test_adaptive_gk_batch_raises_when_starved():
    with pytest.raises(QuadratureError):
        adaptive_gk_batch(lambda own, t: np.sin(1.0 / t), np.array([1e-9]), np.array([1.0]),
                          np.array([0]), 1, atol=1e-15, rtol=1e-15, max_rounds=3)


def test_cubature_with_split_kink():
    f = lambda x, y: np.abs(x - 0.3) * (1 + y)  # noqa: E731
    val, err, cells, ok = adaptive_cubature(f, 0.0, 1.0, 0.0, 2.0, xsplits=[0.3], atol=1e-12,
                                            rtol=1e-12)
    want = (0.3 ** 2 / 2 + 0.7 ** 2 / 2) * 4.0
    assert ok and val == pytest.approx(want, abs=1e-11)


def test_composite_gauss():
    val = composite_gauss(np.cos, 0.0, math.pi / 2, 8)
    assert val == pytest.approx(1.0, abs=1e-13)
