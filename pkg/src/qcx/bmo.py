"""Ball and rectangle averages of functions on the half-plane, a finite-family
BMO seminorm estimate, and the comparison checks between them.

Both averaging regions are integrated as an outer adaptive integral over
horizontal chords and an inner Gauss-Legendre rule along each chord. A disk
of radius R about (x, c) uses y' = c + R sin(phi), which removes the square
root at the poles; the rectangle uses y' directly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from qcx.boundary_map import LineHomeo
from qcx.distortion import rho
from qcx.errors import MapSpecError
from qcx.extension import jet
from qcx.quadrature import adaptive_gk_batch, gauss_legendre

BALL_FACTOR = 0.5
INNER_ORDER = 24
# Ǎ(log 1/y) - log 1/y
RECT_LOG_SHIFT = 1.0 - 1.5 * math.log(1.5) - 0.5 * math.log(2.0)


@dataclass(frozen=True)
class PlaneField:
    """A real function on the upper half-plane.

    ``y_only`` marks fields independent of x, which lets the averaging
    operators integrate chords in closed form; ``constant`` holds the value
    of a constant field so that averages return it exactly.
    """

    evaluator: object
    tag: str = "custom"
    y_only: bool = False
    constant: float | None = None

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.constant is not None:
            return np.full(np.broadcast(x, y).shape, self.constant)
        return np.asarray(self.evaluator(x, y), dtype=float)


def const_field(c: float) -> PlaneField:
    c = float(c)
    return PlaneField(lambda x, y: np.full(np.broadcast(x, y).shape, c), f"const:{c!r}",
                      True, c)


def log_inv_y() -> PlaneField:
    return PlaneField(lambda x, y: -np.log(y), "log_inv_y", True)


def inv_y() -> PlaneField:
    return PlaneField(lambda x, y: 1.0 / y, "inv_y", True)


def sin_log_inv_y() -> PlaneField:
    return PlaneField(lambda x, y: np.sin(-np.log(y)), "sin_log_inv_y", True)


def one_plus_log1p_inv_y() -> PlaneField:
    return PlaneField(lambda x, y: 1.0 + np.log1p(1.0 / y), "one_plus_log1p_inv_y", True)


def bilinear_field(xs, ys, values, tag="csv") -> PlaneField:
    """Piecewise-bilinear interpolant of values[i, j] at (xs[i], ys[j]);
    points outside the grid take the value at the nearest grid point."""
    from scipy.interpolate import RegularGridInterpolator

    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    interp = RegularGridInterpolator((xs, ys), np.asarray(values, dtype=float),
                                     method="linear")

    def ev(x, y):
        x, y = np.broadcast_arrays(x, y)
        pts = np.column_stack([np.clip(x.ravel(), xs[0], xs[-1]),
                               np.clip(y.ravel(), ys[0], ys[-1])])
        return interp(pts).reshape(x.shape)

    return PlaneField(ev, tag)


def field_from_csv(path) -> PlaneField:
    """Read a field from CSV rows x,y,value covering a full rectangular grid."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise MapSpecError("empty field file", "$")
        if [h.strip().lower() for h in header[:2]] != ["x", "y"] or len(header) < 3:
            raise MapSpecError("header must be x,y,value", "$[0]")
        for n, row in enumerate(reader, start=1):
            try:
                rows.append([float(v) for v in row[:3]])
            except (ValueError, IndexError):
                raise MapSpecError(f"unreadable row {row!r}", f"$[{n}]") from None
    data = np.asarray(rows, dtype=float)
    if data.size == 0:
        raise MapSpecError("no data rows", "$")
    xs, xi = np.unique(data[:, 0], return_inverse=True)
    ys, yi = np.unique(data[:, 1], return_inverse=True)
    if xs.size < 2 or ys.size < 2 or xs.size * ys.size != len(data):
        raise MapSpecError("rows do not form a full rectangular grid with >= 2 nodes per axis",
                           "$")
    if ys[0] <= 0:
        raise MapSpecError("grid must lie in y > 0", "$")
    grid = np.full((xs.size, ys.size), np.nan)
    grid[xi, yi] = data[:, 2]
    if np.isnan(grid).any():
        raise MapSpecError("duplicate grid nodes", "$")
    return bilinear_field(xs, ys, grid, tag=f"csv:{path}")


BUILTIN_FIELDS = {
    "log_inv_y": log_inv_y,
    "inv_y": inv_y,
    "sin_log_inv_y": sin_log_inv_y,
    "one_plus_log1p_inv_y": one_plus_log1p_inv_y,
}


def parse_field(text: str) -> PlaneField:
    """const:c, a builtin name, csv:PATH or a path ending in .csv."""
    if text.startswith("const:"):
        try:
            return const_field(float(text[6:]))
        except ValueError:
            raise MapSpecError(f"bad constant in {text!r}", "--field") from None
    if text in BUILTIN_FIELDS:
        return BUILTIN_FIELDS[text]()
    if text.startswith("csv:"):
        return field_from_csv(text[4:])
    if text.endswith(".csv"):
        return field_from_csv(text)
    raise MapSpecError(f"unknown field {text!r}", "--field")


# ---------------------------------------------------------------------------
# region integrals


def _chord_integrals(A: PlaneField, cx, yv, half, order):
    """int_{cx-half}^{cx+half} A(s, yv) ds, elementwise."""
    if A.y_only:
        return 2.0 * half * A(cx, yv)
    t, w = gauss_legendre(order)
    X = cx[..., None] + half[..., None] * t
    vals = A(X, np.broadcast_to(yv[..., None], X.shape))
    return half * (vals @ w)


class _Regions:
    """Disks (kind 'ball') or rectangles (kind 'rect') given by centers and sizes.

    ball: center (cx, cy), radius R. rect: [cx - y, cx + y] x [y/2, 3y/2]
    for the center (cx, y).
    """

    def __init__(self, kind, cx, cy, size=None):
        self.kind = kind
        self.cx = np.atleast_1d(np.asarray(cx, dtype=float)).ravel()
        self.cy = np.atleast_1d(np.asarray(cy, dtype=float)).ravel()
        if kind == "ball":
            self.R = np.atleast_1d(np.asarray(size, dtype=float)).ravel()
            self.cx, self.cy, self.R = np.broadcast_arrays(self.cx, self.cy, self.R)
            if np.any(self.R >= self.cy) or np.any(self.R <= 0):
                raise ValueError("balls must have 0 < r < center height")
            self.lo = np.full(self.cx.shape, -0.5 * math.pi)
            self.hi = np.full(self.cx.shape, 0.5 * math.pi)
            self.area = math.pi * self.R ** 2
        else:
            self.cx, self.cy = np.broadcast_arrays(self.cx, self.cy)
            if np.any(self.cy <= 0):
                raise ValueError("rectangle centers must lie in y > 0")
            self.lo = 0.5 * self.cy
            self.hi = 1.5 * self.cy
            self.area = 2.0 * self.cy ** 2
        self.n = self.cx.size

    def chord(self, own, v):
        """(height, half width, jacobian) of the chord at outer parameter v."""
        if self.kind == "ball":
            R = self.R[own]
            c = np.cos(v)
            return self.cy[own] + R * np.sin(v), R * c, R * c
        return v, self.cy[own], np.ones_like(v)

    def integrate(self, A: PlaneField, func=None, tol=1e-10, order=INNER_ORDER, scale=None):
        """int over each region of func(A, owner) (A itself when func is None)."""
        def integrand(own, v):
            yv, half, jac = self.chord(own, v)
            if func is None:
                return jac * _chord_integrals(A, self.cx[own], yv, half, order)
            if A.y_only:
                return jac * 2.0 * half * func(A(self.cx[own], yv), own)
            t, w = gauss_legendre(order)
            X = self.cx[own][:, None] + half[:, None] * t
            vals = A(X, np.broadcast_to(yv[:, None], X.shape))
            vals = func(vals, np.broadcast_to(own[:, None], X.shape))
            return jac * half * (vals @ w)

        if scale is None:
            scale = np.ones(self.n)
        val, _ = adaptive_gk_batch(integrand, self.lo, self.hi, np.arange(self.n), self.n,
                                   atol=tol * scale * self.area, rtol=tol)
        return val

    def means(self, A: PlaneField, tol=1e-10):
        if A.constant is not None:
            return np.full(self.n, A.constant)
        return self.integrate(A, tol=tol) / self.area

    def oscillations(self, A: PlaneField, mean, tol=1e-8):
        if A.constant is not None:
            return np.zeros(self.n)
        scale = np.maximum(np.abs(mean), 1.0)
        return self.integrate(A, lambda a, own: np.abs(a - mean[own]), tol=tol,
                              scale=scale) / self.area


def _output(vals, scalar, shape):
    return float(vals[0]) if scalar else vals.reshape(shape)


def _points(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scalar = x.ndim == 0 and y.ndim == 0
    x, y = np.broadcast_arrays(np.atleast_1d(x), np.atleast_1d(y))
    if np.any(~(y > 0)):
        raise ValueError("averages are defined for y > 0")
    return x.ravel(), y.ravel(), scalar, x.shape


def ball_average(A: PlaneField, x, y, tol: float = 1e-10):
    """Â(z): mean of A over the disk B(z, y/2)."""
    xa, ya, scalar, shape = _points(x, y)
    return _output(_Regions("ball", xa, ya, BALL_FACTOR * ya).means(A, tol), scalar, shape)


def rect_average(A: PlaneField, x, y, tol: float = 1e-10):
    """Ǎ(z): mean of A over [x - y, x + y] x [y/2, 3y/2]."""
    xa, ya, scalar, shape = _points(x, y)
    return _output(_Regions("rect", xa, ya).means(A, tol), scalar, shape)


def ball_averaged(A: PlaneField, tol: float = 1e-10) -> PlaneField:
    """Â as a field in its own right."""
    return PlaneField(lambda x, y: ball_average(A, x, y, tol), f"ball({A.tag})", A.y_only,
                      A.constant)


def rect_averaged(A: PlaneField, tol: float = 1e-10) -> PlaneField:
    return PlaneField(lambda x, y: rect_average(A, x, y, tol), f"rect({A.tag})", A.y_only,
                      A.constant)


# ---------------------------------------------------------------------------
# seminorm estimate


@dataclass(frozen=True)
class BallFamily:
    """Balls centered at (j 2^-k, 2^-k h) for h in ``heights`` with radii
    y * f for f in ``radius_factors``, k = 0..k_max, x in [x_lo, x_hi].
    At most ``max_centers`` evenly spread x-centers are used per level."""

    k_max: int = 10
    x_lo: float = -1.0
    x_hi: float = 1.0
    heights: tuple = (1.0, 1.5, 2.0)
    radius_factors: tuple = (0.25, 0.5 * (1.0 - 2.0 ** -6))
    max_centers: int = 9

    def __post_init__(self):
        if any(f <= 0 or f >= 1 for f in self.radius_factors):
            raise ValueError("radius factors must lie in (0, 1) so closures stay in y > 0")
        if self.k_max < 0 or self.x_lo > self.x_hi or self.max_centers < 1:
            raise ValueError("invalid ball family")

    def balls(self) -> np.ndarray:
        out = []
        for k in range(self.k_max + 1):
            step = 2.0 ** -k
            j = np.arange(math.ceil(self.x_lo / step), math.floor(self.x_hi / step) + 1)
            if j.size > self.max_centers:
                j = j[np.unique(np.round(np.linspace(0, j.size - 1, self.max_centers))
                                .astype(int))]
            for hgt in self.heights:
                for f in self.radius_factors:
                    cy = step * hgt
                    for jj in j:
                        out.append((jj * step, cy, f * cy))
        return np.asarray(out, dtype=float).reshape(-1, 3)


@dataclass
class BmoEstimate:
    balls: np.ndarray
    means: np.ndarray
    oscillations: np.ndarray
    seminorm_lower_bound: float
    argmax: int

    @property
    def argmax_ball(self):
        return tuple(float(v) for v in self.balls[self.argmax])

    def as_dict(self) -> dict:
        fam = [{"cx": float(b[0]), "cy": float(b[1]), "r": float(b[2]), "mean": float(m),
                "oscillation": float(o)}
               for b, m, o in zip(self.balls, self.means, self.oscillations)]
        cx, cy, r = self.argmax_ball
        return {"family": fam, "seminorm_lower_bound": self.seminorm_lower_bound,
                "argmax_ball": {"cx": cx, "cy": cy, "r": r}}


def ball_oscillation(A: PlaneField, cx, cy, r, tol: float = 1e-8):
    """(mean, (1/|B|) int_B |A - A_B|) for each ball."""
    reg = _Regions("ball", cx, cy, r)
    m = reg.means(A, tol * 1e-2)
    return m, reg.oscillations(A, m, tol)


def bmo_seminorm(A: PlaneField, family: BallFamily | np.ndarray = BallFamily(),
                 tol: float = 1e-8) -> BmoEstimate:
    """Max of the mean oscillations over a finite family of balls: a lower
    bound for the BMO seminorm."""
    balls = family.balls() if isinstance(family, BallFamily) else np.asarray(family, float)
    balls = balls.reshape(-1, 3)
    if np.any(balls[:, 2] >= balls[:, 1]):
        raise ValueError("every ball needs radius < center height")
    m, osc = ball_oscillation(A, balls[:, 0], balls[:, 1], balls[:, 2], tol)
    i = int(np.argmax(osc))
    return BmoEstimate(balls, m, osc, float(osc[i]), i)


# ---------------------------------------------------------------------------
# comparisons


def _ratio(a, b):
    if b == 0.0:
        return 0.0 if a == 0.0 else math.inf
    return a / b


@dataclass
class LemmaReport:
    seminorm: float
    seminorm_ball: float
    seminorm_rect: float
    sup_difference: float
    ratio_difference: float
    ratio_ball: float
    ratio_rect: float
    coarse: "LemmaReport | None" = field(default=None, repr=False)

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("seminorm", "seminorm_ball", "seminorm_rect",
                                           "sup_difference", "ratio_difference",
                                           "ratio_ball", "ratio_rect")}
        if self.coarse is not None:
            d["coarse"] = self.coarse.as_dict()
        return d


def _lemma_once(A, family, xs, ys, tol):
    s = bmo_seminorm(A, family, tol).seminorm_lower_bound
    hat = ball_averaged(A, tol * 1e-2)
    chk = rect_averaged(A, tol * 1e-2)
    diff = float(np.max(np.abs(rect_average(A, xs, ys, tol) - ball_average(A, xs, ys, tol))))
    s_hat = bmo_seminorm(hat, family, tol).seminorm_lower_bound
    s_chk = bmo_seminorm(chk, family, tol).seminorm_lower_bound
    return LemmaReport(s, s_hat, s_chk, diff, _ratio(diff, s), _ratio(s_hat, s),
                       _ratio(s_chk, s))


def lemma_checks(A: PlaneField, family: BallFamily = BallFamily(k_max=6, max_centers=3),
                 samples=None, tol: float = 1e-8) -> LemmaReport:
    """Empirical constants sup|Ǎ - Â| / ||A||_*, ||Â||_* / ||A||_* and
    ||Ǎ||_* / ||A||_*, on ``family`` and on the family two levels coarser."""
    if samples is None:
        k = np.arange(family.k_max + 1)
        ys = 2.0 ** -k
        xs = np.linspace(family.x_lo, family.x_hi, 5)
        X, Y = np.meshgrid(xs, ys)
        samples = (X.ravel(), Y.ravel())
    xs, ys = (np.asarray(v, dtype=float) for v in samples)
    fine = _lemma_once(A, family, xs, ys, tol)
    if family.k_max >= 2:
        coarse_family = BallFamily(family.k_max - 2, family.x_lo, family.x_hi,
                                   family.heights, family.radius_factors,
                                   family.max_centers)
        keep = ys >= 2.0 ** -(family.k_max - 2)
        fine.coarse = _lemma_once(A, coarse_family, xs[keep], ys[keep], tol)
    return fine


@dataclass
class ImplicationReport:
    points: int
    hyp_rho_points: int
    sup_K_over_bound: float
    hyp_K_points: int
    rho_violations: int
    seminorm: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def implication_check(h: LineHomeo, A: PlaneField, x, y,
                      family: BallFamily = BallFamily(k_max=6, max_centers=5),
                      tol: float = 1e-8, slack: float = 1e-9) -> ImplicationReport:
    """On the points (x, y): where rho <= Â, the ratio K / (Â + ||A||_*) is
    reported; where K <= Â, rho <= 4 Â is checked."""
    xa, ya, _, _ = _points(x, y)
    a_hat = np.atleast_1d(ball_average(A, xa, ya, tol))
    K = jet(h, xa, ya).dilatation_K
    r = rho(h, xa, ya)
    s = bmo_seminorm(A, family, tol).seminorm_lower_bound
    hyp1 = r <= a_hat + slack
    sup = float(np.max(K[hyp1] / (a_hat[hyp1] + s))) if hyp1.any() else 0.0
    hyp2 = K <= a_hat + slack
    viol = int(np.count_nonzero(r[hyp2] > 4.0 * a_hat[hyp2] + slack))
    return ImplicationReport(int(xa.size), int(hyp1.sum()), sup, int(hyp2.sum()), viol, s)
