import json
import math

import numpy as np
import pytest

from qcx import boundary_map as bm
from qcx import oracle
from qcx.extension import ExtensionJet, jet
from conftest import DATA, random_pl, random_points


def test_fd_jet_identity():
    ux, uy, vx, vy = oracle.fd_jet(bm.identity(), 0.3, 2.0)
    assert (ux, uy, vx, vy) == pytest.approx((1.0, 0.0, 0.0, 0.5), abs=1e-9)


def test_fd_jet_near_kink_line(rng):
    h = bm.two_slope(4.0)
    # x + y lands 1e-7 past the kink at 0
    for x, y in [(-1.0 + 1e-7, 1.0), (1e-9, 0.5), (0.5, 0.5 - 1e-8)]:
        assert oracle.relative_jet_error(h, x, y) < 1e-6


def test_norm_dilatation_closed_form():
    j = ExtensionJet(0, 0, 3.0, 0.0, 0.0, 1.0, 3.0, 0, 0)
    assert oracle.norm_dilatation(j) == pytest.approx(3.0)
    rng = np.random.default_rng(7)
    for _ in range(50):
        M = rng.normal(size=(2, 2))
        if np.linalg.det(M) <= 0:
            M[0] *= -1
        j = ExtensionJet(0, 0, M[0, 0], M[0, 1], M[1, 0], M[1, 1], 0, 0, 0)
        s = np.linalg.svd(M, compute_uv=False)
        assert oracle.norm_dilatation(j) == pytest.approx(s[0] / s[1], rel=1e-12)


def test_norm_dilatation_rejects_orientation_reversal():
    with pytest.raises(ValueError):
        oracle.norm_dilatation(ExtensionJet(0, 0, 1.0, 0.0, 0.0, -1.0, -1.0, 0, 0))


def test_brute_integral_polynomial():
    val = oracle.brute_integral(lambda x, y: x ** 3 * y + y ** 2, (0.0, 1.0, 0.0, 2.0), n=4)
    assert val == pytest.approx(0.5 + 8.0 / 3.0, rel=1e-14)


def test_config_validation():
    with pytest.raises(ValueError):
        oracle.OracleConfig(fd_step_relative=0.5)
    with pytest.raises(ValueError):
        oracle.OracleConfig(richardson_levels=0)


def test_random_jets_agree(rng):
    for _ in range(10):
        h = random_pl(rng)
        x, y = random_points(rng, 5)
        for k in range(5):
            assert oracle.relative_jet_error(h, x[k], y[k]) < 1e-6
            j = jet(h, x[k], y[k])
            assert abs(oracle.norm_dilatation(j) - j.dilatation_K) < 1e-9


def test_goldens_reproduce_frozen_file():
    with open(DATA / "goldens.json") as fh:
        frozen = json.load(fh)
    fresh = json.loads(json.dumps(oracle.golden_values()))

    def walk(a, b, path=""):
        assert type(a) is type(b) or isinstance(a, (int, float)), path
        if isinstance(a, dict):
            assert a.keys() == b.keys(), path
            for k in a:
                walk(a[k], b[k], f"{path}.{k}")
        else:
            assert a == pytest.approx(b, rel=1e-12, abs=1e-15), path

    walk(frozen, fresh)


def test_spherical_mass_golden(goldens):
    assert goldens["spherical_mass_half_plane"] == pytest.approx(2 * math.pi, rel=1e-12)
