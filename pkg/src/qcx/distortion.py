"""Symmetric distortion, segment averages, the normalized triple and the
two-sided dilatation bound rho/4 <= K <= C0 max{rho, segment average}."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from qcx import kernels
from qcx.boundary_map import TWO_PI, CircleHomeo, LineHomeo, integral, normalize
from qcx.extension import jet
from qcx.quadrature import adaptive_gk_batch

C0 = 50.0


def _flat(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scalar = x.ndim == 0 and y.ndim == 0
    x, y = np.broadcast_arrays(np.atleast_1d(x), np.atleast_1d(y))
    return (np.ascontiguousarray(x.ravel()), np.ascontiguousarray(y.ravel()),
            scalar, x.shape)


def _pl_window(h, x, y):
    if x.size == 0:
        return None
    return h.piecewise_linear(float(np.min(x - y)), float(np.max(x + y)))


def rho(h: LineHomeo, x, t):
    """max{r, 1/r} with r = (h(x+t) - h(x)) / (h(x) - h(x-t))."""
    xa, ta, scalar, shape = _flat(x, t)
    if np.any(~(ta > 0)):
        raise ValueError("rho needs t > 0")
    pl = _pl_window(h, xa, ta)
    if pl is not None:
        out = kernels.pl_rho(pl.bt, pl.bh, pl.slopes, xa, ta)
    else:
        hx = np.asarray(h(xa))
        r = (np.asarray(h(xa + ta)) - hx) / (hx - np.asarray(h(xa - ta)))
        out = np.maximum(r, 1.0 / r)
    return float(out[0]) if scalar else out.reshape(shape)


def rho_circular(ch: CircleHomeo, theta, t):
    """Arclength symmetric distortion of a circle map, t in (0, pi/2)."""
    t = np.asarray(t, dtype=float)
    if np.any((t <= 0) | (t >= np.pi / 2)):
        raise ValueError("rho_circular needs 0 < t < pi/2")
    return rho(ch.lift, np.asarray(theta, dtype=float) / TWO_PI, t / TWO_PI)


@dataclass
class DistortionSample:
    rho: float
    avg_right: float
    avg_left: float
    avg_combined: float


def _identity(r):
    return r


def _pl_edges(pl, x, y, sign):
    """Piece edges in w, refined where the increment ratio crosses 1."""
    w = kernels.segment_pieces(pl.bt, pl.bh, pl.slopes, x, y, sign)
    X = x[:, None] + sign * w
    T = y[:, None] - w
    h0 = kernels.pl_eval(pl.bt, pl.bh, pl.slopes, X)
    D = (kernels.pl_eval(pl.bt, pl.bh, pl.slopes, X + T) - h0) - (
        h0 - kernels.pl_eval(pl.bt, pl.bh, pl.slopes, X - T))
    da, db = D[:, :-1], D[:, 1:]
    cross = da * db < 0
    frac = np.where(cross, da / np.where(cross, da - db, 1.0), 1.0)
    mid = w[:, :-1] + frac * (w[:, 1:] - w[:, :-1])
    edges = np.empty((w.shape[0], 2 * w.shape[1] - 1))
    edges[:, 0::2] = w
    edges[:, 1::2] = mid
    return edges


def _kink_edges(h, x, y, sign):
    """Piece edges in w from the kinks of a general map (crossings of x+-w+-(y-w))."""
    kinks = np.asarray(h.kinks(float(np.min(x - y)), float(np.max(x + y))), dtype=float)
    w_end = 0.25 * y
    if sign > 0:
        cand = np.concatenate([kinks[None, :] - x[:, None],
                               0.5 * (kinks[None, :] - x[:, None] + y[:, None])], axis=1)
    else:
        cand = np.concatenate([x[:, None] - kinks[None, :],
                               0.5 * (x[:, None] + y[:, None] - kinks[None, :])], axis=1)
    cand = np.clip(cand, 0.0, w_end[:, None])
    edges = np.concatenate([np.zeros((x.size, 1)), cand, w_end[:, None]], axis=1)
    return np.sort(edges, axis=1)


def _segment_mean(h, x, y, sign, func, tol):
    """Mean of func(rho) along the segment from (x, y) to (x + sign*y/4, 3y/4),
    by batched adaptive Gauss-Kronrod on the smooth pieces."""
    pl = _pl_window(h, x, y)
    if pl is not None:
        edges = _pl_edges(pl, x, y, sign)

        def rho_at(X, T):
            return kernels.pl_rho(pl.bt, pl.bh, pl.slopes, X, T)
    else:
        edges = _kink_edges(h, x, y, sign)

        def rho_at(X, T):
            return np.asarray(rho(h, X, T))

    def integrand(own, w):
        return func(rho_at(x[own] + sign * w, y[own] - w))

    owner = np.broadcast_to(np.arange(x.size)[:, None], edges[:, 1:].shape)
    w_end = 0.25 * y
    val, _ = adaptive_gk_batch(integrand, edges[:, :-1], edges[:, 1:], owner, x.size,
                               atol=tol * w_end, rtol=tol)
    return val / w_end


def segment_average(h: LineHomeo, x, y, tol: float = 1e-10) -> DistortionSample:
    """rho at (x, y) and its averages along the segments to (x -+ y/4, 3y/4).

    Exact for piecewise-linear maps (rho is a ratio of linear functions on
    each piece); adaptive Gauss-Kronrod on kink-split pieces otherwise.
    """
    xa, ya, scalar, shape = _flat(x, y)
    if np.any(~(ya > 0)):
        raise ValueError("segment averages need y > 0")
    pl = _pl_window(h, xa, ya)
    if pl is not None:
        right, left = kernels.pl_segment_averages(pl.bt, pl.bh, pl.slopes, xa, ya)
    else:
        right = _segment_mean(h, xa, ya, 1.0, _identity, tol)
        left = _segment_mean(h, xa, ya, -1.0, _identity, tol)
    r = rho(h, xa, ya)
    comb = 0.5 * (right + left)
    if scalar:
        return DistortionSample(float(r[0]), float(right[0]), float(left[0]), float(comb[0]))
    return DistortionSample(r.reshape(shape), right.reshape(shape),
                            left.reshape(shape), comb.reshape(shape))


def segment_average_of(h: LineHomeo, x, y, func, tol: float = 1e-12):
    """Combined average of func(rho) over both segments, the Jensen-side
    counterpart of ``avg_combined``."""
    xa, ya, scalar, shape = _flat(x, y)
    if xa.size == 0:
        return np.empty(shape)
    out = 0.5 * (_segment_mean(h, xa, ya, 1.0, func, tol)
                 + _segment_mean(h, xa, ya, -1.0, func, tol))
    return float(out[0]) if scalar else out.reshape(shape)


@dataclass
class NormalizedTriple:
    beta: float
    xi: float
    eta: float
    beta_is_rho: bool  # True: beta = rho (beta >= 1); False: beta = 1/rho

    def F(self) -> float:
        return F_value(self.beta, self.xi, self.eta)


def beta_xi_eta(h: LineHomeo, x: float, y: float, tol: float = 1e-12) -> NormalizedTriple:
    """beta = -h*(-1), xi = 1 - int_0^1 h*, eta = 1 + (1/beta) int_{-1}^0 h*
    for the normalization h* of h at (x, y)."""
    hs = normalize(h, x, y)
    beta = -float(hs(-1.0))
    xi = 1.0 - integral(hs, 0.0, 1.0, tol)
    eta = 1.0 + integral(hs, -1.0, 0.0, tol) / beta
    return NormalizedTriple(beta, xi, eta, beta >= 1.0)


def F_value(beta, xi, eta):
    """(1/(xi+eta)) (beta (1 + eta^2) + (1/beta)(1 + xi^2))."""
    beta = np.asarray(beta, dtype=float)
    s = np.asarray(xi, dtype=float) + np.asarray(eta, dtype=float)
    if np.any(s <= 0):
        raise ValueError("F is defined for xi + eta > 0")
    out = (beta * (1.0 + np.square(eta)) + (1.0 + np.square(xi)) / beta) / s
    return float(out) if out.ndim == 0 else out


@dataclass
class BoundsReport:
    points_checked: int
    lower_violations: int
    upper_violations: int
    empirical_max_ratio_lower: float
    empirical_max_ratio_upper: float
    table: dict = field(default_factory=dict, repr=False)

    def summary(self) -> dict:
        return {
            "points_checked": self.points_checked,
            "lower_violations": self.lower_violations,
            "upper_violations": self.upper_violations,
            "empirical_max_ratio_lower": self.empirical_max_ratio_lower,
            "empirical_max_ratio_upper": self.empirical_max_ratio_upper,
        }


BOUNDS_COLUMNS = ("x", "y", "K", "rho", "avg_left", "avg_right", "avg_combined",
                  "lower_ok", "upper_ok")


def check_bounds(h: LineHomeo, x, y, tol: float = 1e-9) -> BoundsReport:
    """Count violations of rho/4 <= K + tol and K <= C0 max{rho, avg} + tol."""
    xa, ya, _, _ = _flat(x, y)
    K = jet(h, xa, ya).dilatation_K
    ds = segment_average(h, xa, ya)
    lower_ok = ds.rho / 4.0 <= K + tol
    bound = C0 * np.maximum(ds.rho, ds.avg_combined)
    upper_ok = K <= bound + tol
    table = {"x": xa, "y": ya, "K": K, "rho": ds.rho, "avg_left": ds.avg_left,
             "avg_right": ds.avg_right, "avg_combined": ds.avg_combined,
             "lower_ok": lower_ok, "upper_ok": upper_ok}
    return BoundsReport(
        points_checked=int(xa.size),
        lower_violations=int(np.count_nonzero(~lower_ok)),
        upper_violations=int(np.count_nonzero(~upper_ok)),
        empirical_max_ratio_lower=float(np.max(ds.rho / (4.0 * K))) if xa.size else 0.0,
        empirical_max_ratio_upper=float(np.max(K / np.maximum(ds.rho, ds.avg_combined)))
        if xa.size else 0.0,
        table=table,
    )
