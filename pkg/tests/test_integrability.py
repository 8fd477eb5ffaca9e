import math

import numpy as np
import pytest

from qcx import boundary_map as bm
from qcx import integrability as I
from conftest import cascade_circle


def zero(x, y):
    return np.zeros(np.broadcast(x, y).shape)


def one(x, y):
    return np.ones(np.broadcast(x, y).shape)


def test_phi_family_parse_and_values():
    e = I.PhiFamily.parse("exp", 0.5)
    assert e(np.array([2.0]))[0] == pytest.approx(math.e)
    p = I.PhiFamily.parse("power:3", 2.0)
    assert p(np.array([1.5]))[0] == pytest.approx(27.0)
    s = I.PhiFamily.parse("subexp", 1.0)
    assert s(np.array([0.0]))[0] == pytest.approx(1.0)
    lin = I.PhiFamily.parse("linear", 2.0)
    assert lin(np.array([3.0]))[0] == pytest.approx(6.0)
    for bad in ("power:x", "power:0.5", "cosh"):
        with pytest.raises(Exception):
            I.PhiFamily.parse(bad, 1.0)


def test_phi_families_convex_increasing():
    t = np.linspace(0.0, 20.0, 401)
    for text in ("exp", "power:2", "subexp", "linear"):
        v = I.PhiFamily.parse(text, 0.7)(t)
        assert np.all(np.diff(v) > 0)
        assert np.all(np.diff(v, 2) >= -1e-9 * np.abs(v[2:]))


def test_dyadic_layers_cover_box():
    box = I.Box.symmetric(5.0, 2.0 ** -6, 4.0)
    layers = sorted((lo, hi) for _, lo, hi, _ in I.dyadic_layers(box.y_min, box.y_max))
    assert layers[0][0] == pytest.approx(box.y_min) and layers[-1][1] == pytest.approx(box.y_max)
    for (a, b), (c, _) in zip(layers, layers[1:]):
        assert b > a and c == pytest.approx(b)


def test_spherical_mass_grows_from_below():
    totals = []
    for X in (10.0, 100.0, 1000.0):
        rep = I.spherical_integral(one, I.Box.symmetric(X, 1e-6, X), tol=1e-8)
        totals.append(rep.total)
    assert totals[0] < totals[1] < totals[2] < 2 * math.pi
    assert abs(totals[2] - 2 * math.pi) < 1e-3


def test_spherical_density_brute():
    from qcx.oracle import brute_integral
    region = (-1.0, 2.0, 0.5, 1.5)
    want = brute_integral(I.spherical_density, region, n=40, order=6)
    got = I.spherical_integral(one, I.Box(-1.0, 2.0, 0.5, 1.5), tol=1e-12).total
    assert got == pytest.approx(want, rel=1e-10)


def test_zero_field_converges():
    rep = I.spherical_integral(zero, I.Box.symmetric(10.0, 1e-4, 10.0))
    assert rep.total == 0.0
    assert rep.verdict == "converging"


@pytest.mark.parametrize("s,verdict", [(0.5, "converging"), (1.5, "diverging")])
def test_power_singularity_verdicts(s, verdict):
    # near y = 0 the density is ~4, so int y^-s converges iff s < 1
    rep = I.spherical_integral(lambda x, y: y ** -s + 0.0 * x, I.Box.symmetric(1.0, 2.0 ** -14, 1.0),
                               tol=1e-8)
    assert rep.verdict == verdict


def test_classify_rules():
    assert I.classify([2.0 ** -k for k in range(10)])[0] == "converging"
    assert I.classify([1.0] * 10)[0] == "diverging"
    assert I.classify([1.1 ** k for k in range(10)])[0] == "diverging"
    growing_ratio = np.cumprod([1.0] + [0.85 + 0.02 * k for k in range(9)])
    assert I.classify(growing_ratio)[0] == "diverging"


def test_identity_linear_transfer():
    box = I.Box.symmetric(5.0, 1e-3, 5.0)
    chk = I.transfer_check(bm.identity(), I.PhiFamily("linear", 1.0), box)
    mass = I.spherical_integral(one, box).total
    assert chk.left == pytest.approx(mass / 200.0, rel=1e-8)
    assert chk.middle == pytest.approx(2.0 * mass / 50.0, rel=1e-8)
    assert chk.right == pytest.approx(mass, rel=1e-8)
    assert chk.pointwise_ok and chk.left <= chk.middle


def test_two_slope_transfer_pointwise():
    chk = I.transfer_check(bm.two_slope(2.0), I.PhiFamily("power", 1.0, 1.0),
                           I.Box.symmetric(10.0, 1e-3, 10.0))
    assert chk.pointwise_ok and chk.left <= chk.middle
    assert chk.nodes_checked > 10_000


def test_log_singular_rho_verdicts():
    h = bm.log_singular()
    half = I.rho_integral(h, I.PhiFamily("exp", 0.5))
    two = I.rho_integral(h, I.PhiFamily("exp", 2.0))
    assert half.verdict == "converging"
    assert two.verdict == "diverging"


def test_rotation_boundary_integral_exact():
    rep = I.circle_integrability(bm.rotation(0.3), I.PhiFamily("exp", 1.0))
    assert rep.boundary.total == pytest.approx(math.e * math.pi ** 2, rel=1e-10)
    assert math.isfinite(rep.disk.total)
    ident = I.circle_integrability(bm.rotation(0.0), I.PhiFamily("exp", 1.0))
    assert ident.boundary.total == pytest.approx(rep.boundary.total, rel=1e-12)


def test_steep_breakpoint_circle_converges():
    # slopes 10 and 1/10 on the lift
    prof = bm.PiecewiseLinear([(0.0, 0.0), (1.0 / 11.0, 10.0 / 11.0), (1.0, 1.0)], 1.0, 1.0)
    assert prof.slopes[1] == pytest.approx(10.0) and prof.slopes[2] == pytest.approx(0.1)
    rep = I.circle_integrability(bm.circle_from_lift(prof), I.PhiFamily("exp", 0.1))
    assert rep.boundary.verdict == "converging"
    assert math.isfinite(rep.boundary.total) and math.isfinite(rep.disk.total)


def test_criterion_rotation_bounded():
    chk = I.distortion_criterion_check(bm.rotation(0.5), 0.0, 1e-10)
    assert chk.satisfied
    assert chk.sup_ratio == pytest.approx(chk.shell_sups[0])


def test_criterion_log_singular_ratio_tends_to_one():
    chk = I.distortion_criterion_check(bm.log_singular_circle(), 0.0, 1e-12)
    assert chk.satisfied
    tail = np.asarray(chk.shell_sups[-4:])
    assert np.all(np.abs(tail - 1.0) < 0.2)
    assert np.all(np.diff(chk.shell_sups[2:]) <= 1e-12)


def test_criterion_cascade_fails():
    chk = I.distortion_criterion_check(cascade_circle(), 0.0, 1e-10)
    assert not chk.satisfied
    sups = np.asarray(chk.shell_sups)
    assert np.all(np.diff(sups[-6:]) > 0)


def test_welding_identity_rotation(goldens):
    a = I.welding_l1_test(bm.rotation(0.0))
    b = I.welding_l1_test(bm.rotation(1.1))
    assert a.converged and b.converged
    assert a.value == pytest.approx(goldens["welding_l1_identity"], abs=1e-4)
    assert b.value == pytest.approx(a.value, abs=1e-8)


def test_welding_pl_circle_finite():
    ch = bm.circle_from_function(lambda th: th + 0.5 * np.sin(th), 32)
    rep = I.welding_l1_test(ch)
    assert rep.converged and math.isfinite(rep.value)
    shells = np.abs(np.asarray(rep.shells))
    assert shells[-1] < shells[2]
