import json
import os
from pathlib import Path

import numpy as np
import pytest

from qcx import boundary_map as bm
from qcx import kernels

DATA = Path(__file__).parent / "data"
SEED = int(os.environ.get("QCX_SEED", "0"))


def random_pl(rng, n_min=2, n_max=12, span=8.0, slope_range=(0.2, 5.0)):
    """Random increasing piecewise-linear map with breakpoints in [-span, span]."""
    n = int(rng.integers(n_min, n_max + 1))
    t = np.sort(rng.uniform(-span, span, n))
    while np.any(np.diff(t) < 1e-3):
        t = np.sort(rng.uniform(-span, span, n))
    lo, hi = np.log(slope_range)
    slopes = np.exp(rng.uniform(lo, hi, n + 1))
    h = np.concatenate([[rng.uniform(-1, 1)], np.cumsum(slopes[1:-1] * np.diff(t))])
    h[1:] += h[0]
    return bm.PiecewiseLinear(np.column_stack([t, h]), slopes[0], slopes[-1])


def random_points(rng, n, x=(-10.0, 10.0), y=(1e-3, 10.0)):
    xs = rng.uniform(*x, n)
    ys = np.exp(rng.uniform(np.log(y[0]), np.log(y[1]), n))
    return xs, ys


def cascade_circle(j_max=40):
    """Circle map whose lift near 1 is a geometric breakpoint cascade with
    profile 1 - s^(5/4) at 1 - s, s = 2^-j; the distortion at theta = 0
    grows like t^(-1/4)."""
    a = 2.0 * (1.0 - 2.0 ** -1.25)
    pts = [(0.0, 0.0), (0.5, 0.5 * a)]
    pts += [(1.0 - 2.0 ** -j, 1.0 - 2.0 ** (-1.25 * j)) for j in range(2, j_max + 1)]
    pts.append((1.0, 1.0))
    return bm.circle_from_lift(bm.PiecewiseLinear(pts, 1.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture(scope="session")
def goldens():
    with open(DATA / "goldens.json") as fh:
        return json.load(fh)


@pytest.fixture(params=sorted(kernels.backends()))
def backend(request):
    return kernels.backends()[request.param]
