"""Vectorized quadrature: Gauss-Legendre rules and adaptive Gauss-Kronrod."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from qcx.errors import QuadratureError

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_G_WEIGHTS = np.zeros(15)
_G_WEIGHTS[[1, 3, 5]] = _WG[:3]
_G_WEIGHTS[7] = _WG[3]
_G_WEIGHTS[[9, 11, 13]] = _WG[2::-1]


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gl_panels(edges: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights on consecutive panels.

    ``edges`` has shape (..., m+1); the result has shape (..., m*n).
    Zero-length panels get zero weight.
    """
    t, w = gauss_legendre(n)
    a = edges[..., :-1, None]
    b = edges[..., 1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * t
    weights = half * w
    shape = edges.shape[:-1] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)


def _initial_edges(a, b, points):
    inner = [p for p in points if a < p < b and np.isfinite(p)]
    return np.unique(np.concatenate([[a, b], np.asarray(inner, dtype=float)]))


def adaptive_gk(f, a: float, b: float, *, points=(), atol: float = 1e-12,
                rtol: float = 1e-10, max_intervals: int = 4000,
                strict: bool = True) -> tuple[float, float]:
    """Integrate a vectorized ``f`` over [a, b] with adaptive GK15.

    Intervals are split first at ``points`` (known kinks), then bisected
    wherever the local Kronrod-Gauss difference exceeds its share of the
    tolerance. All pending intervals are evaluated in a single call to ``f``.

    Returns ``(value, error_estimate)``. Raises :class:`QuadratureError` when
    the interval budget is exhausted and ``strict`` is true.
    """
    if b == a:
        return 0.0, 0.0
    if b < a:
        val, err = adaptive_gk(f, b, a, points=points, atol=atol, rtol=rtol,
                               max_intervals=max_intervals, strict=strict)
        return -val, err
    edges = _initial_edges(a, b, points)
    lo, hi = edges[:-1], edges[1:]
    done_val = 0.0
    done_err = 0.0
    span = b - a
    while True:
        centre = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        x = centre[:, None] + half[:, None] * GK_NODES
        fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
        kron = half * (fx @ GK_WEIGHTS)
        gauss = half * (fx @ _G_WEIGHTS)
        err = np.abs(kron - gauss)
        total = done_val + kron.sum()
        target = max(atol, rtol * abs(total))
        if done_err + err.sum() <= target:
            return float(total), float(done_err + err.sum())
        share = target * (hi - lo) / span
        split = err > share
        if not split.any():
            split[np.argmax(err)] = True
        done_val += kron[~split].sum()
        done_err += err[~split].sum()
        lo, hi = lo[split], hi[split]
        mid = 0.5 * (lo + hi)
        n_live = lo.size * 2
        if n_live + 1 > max_intervals:
            estimate = float(done_val + kron[split].sum())
            error = float(done_err + err[split].sum())
            if strict:
                raise QuadratureError(
                    f"adaptive quadrature did not converge on [{a}, {b}]",
                    estimate=estimate, error=error)
            return estimate, error
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])


def composite_gauss(f, a: float, b: float, n: int, order: int = 10) -> float:
    """Fixed composite Gauss-Legendre rule on n equal panels."""
    edges = np.linspace(a, b, n + 1)
    x, w = gl_panels(edges, order)
    return float(np.dot(np.asarray(f(x), dtype=float), w))


def adaptive_gk_batch(f, lo, hi, owner, n_out: int, *, atol=1e-12, rtol=1e-10,
                      max_rounds: int = 40, strict: bool = True):
    """Many independent adaptive GK15 integrals evaluated together.

    Panel ``i`` spans ``[lo[i], hi[i]]`` and contributes to integral
    ``owner[i]``. ``f(owner_of_node, nodes)`` is called once per round with
    flat arrays. Each integral gets the tolerance max(atol, rtol*|value|),
    shared among its panels in proportion to their length. Returns
    ``(values, errors)`` of length ``n_out``.
    """
    lo = np.asarray(lo, dtype=float).ravel()
    hi = np.asarray(hi, dtype=float).ravel()
    owner = np.asarray(owner, dtype=np.intp).ravel()
    keep = hi > lo
    lo, hi, owner = lo[keep], hi[keep], owner[keep]
    atol = np.broadcast_to(np.asarray(atol, dtype=float), (n_out,))
    span = np.zeros(n_out)
    np.add.at(span, owner, hi - lo)
    span = np.where(span > 0, span, 1.0)
    done_val = np.zeros(n_out)
    done_err = np.zeros(n_out)
    for _ in range(max_rounds):
        centre = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        x = centre[:, None] + half[:, None] * GK_NODES
        own = np.broadcast_to(owner[:, None], x.shape)
        fx = np.asarray(f(own.ravel(), x.ravel()), dtype=float).reshape(x.shape)
        kron = half * (fx @ GK_WEIGHTS)
        err = np.abs(kron - half * (fx @ _G_WEIGHTS))
        est = done_val.copy()
        np.add.at(est, owner, kron)
        target = np.maximum(atol, rtol * np.abs(est))
        share = target[owner] * (hi - lo) / span[owner]
        ok = err <= share
        np.add.at(done_val, owner[ok], kron[ok])
        np.add.at(done_err, owner[ok], err[ok])
        if ok.all():
            return done_val, done_err
        lo, hi, owner = lo[~ok], hi[~ok], owner[~ok]
        mid = 0.5 * (lo + hi)
        lo, hi, owner = (np.concatenate([lo, mid]), np.concatenate([mid, hi]),
                         np.concatenate([owner, owner]))
    # budget exhausted: fold the remaining panels in at their current estimate
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = centre[:, None] + half[:, None] * GK_NODES
    own = np.broadcast_to(owner[:, None], x.shape)
    fx = np.asarray(f(own.ravel(), x.ravel()), dtype=float).reshape(x.shape)
    kron = half * (fx @ GK_WEIGHTS)
    err = np.abs(kron - half * (fx @ _G_WEIGHTS))
    np.add.at(done_val, owner, kron)
    np.add.at(done_err, owner, err)
    if strict:
        worst = int(owner[np.argmax(err)])
        raise QuadratureError("batched adaptive quadrature did not converge",
                              estimate=float(done_val[worst]), error=float(done_err[worst]))
    return done_val, done_err


_GK2_W = np.outer(GK_WEIGHTS, GK_WEIGHTS)
_GK2_WX = np.outer(_G_WEIGHTS, GK_WEIGHTS)   # Gauss in x, Kronrod in y
_GK2_WY = np.outer(GK_WEIGHTS, _G_WEIGHTS)


def adaptive_cubature(f, x0: float, x1: float, y0: float, y1: float, *,
                      xsplits=(), atol: float = 1e-12, rtol: float = 1e-8,
                      max_cells: int = 200_000, strict: bool = True):
    """Integrate a vectorized ``f(x, y)`` over a rectangle with tensor GK15.

    Cells start from a split at each x in ``xsplits``; a cell whose error
    exceeds its area share of the tolerance is bisected along the axis with
    the larger Gauss-Kronrod discrepancy. Returns ``(value, error, n_cells,
    converged)``; raises :class:`QuadratureError` on budget exhaustion only
    when ``strict``.
    """
    xe = _initial_edges(x0, x1, xsplits)
    ax, bx = xe[:-1].copy(), xe[1:].copy()
    ay = np.full(ax.shape, float(y0))
    by = np.full(ax.shape, float(y1))
    area = (x1 - x0) * (y1 - y0)
    done_val = 0.0
    done_err = 0.0
    n_cells = 0
    while True:
        cx, hx = 0.5 * (ax + bx), 0.5 * (bx - ax)
        cy, hy = 0.5 * (ay + by), 0.5 * (by - ay)
        X = cx[:, None, None] + hx[:, None, None] * GK_NODES[None, :, None]
        Y = cy[:, None, None] + hy[:, None, None] * GK_NODES[None, None, :]
        X, Y = np.broadcast_arrays(X, Y)
        fv = np.asarray(f(X.ravel(), Y.ravel()), dtype=float).reshape(X.shape)
        jac = hx * hy
        kron = jac * np.einsum("cij,ij->c", fv, _GK2_W)
        ex = np.abs(kron - jac * np.einsum("cij,ij->c", fv, _GK2_WX))
        ey = np.abs(kron - jac * np.einsum("cij,ij->c", fv, _GK2_WY))
        err = ex + ey
        n_cells += kron.size
        total = done_val + kron.sum()
        target = max(atol, rtol * abs(total))
        if done_err + err.sum() <= target:
            return float(total), float(done_err + err.sum()), n_cells, True
        split = err > target * (4.0 * hx * hy) / area
        if not split.any():
            split[np.argmax(err)] = True
        done_val += kron[~split].sum()
        done_err += err[~split].sum()
        if n_cells + 2 * int(split.sum()) > max_cells:
            value = float(done_val + kron[split].sum())
            error = float(done_err + err[split].sum())
            if strict:
                raise QuadratureError("adaptive cubature did not converge",
                                      estimate=value, error=error)
            return value, error, n_cells, False
        ax, bx, ay, by = ax[split], bx[split], ay[split], by[split]
        alongx = (ex >= ey)[split]
        mx = np.where(alongx, 0.5 * (ax + bx), bx)
        my = np.where(alongx, by, 0.5 * (ay + by))
        ax, bx, ay, by = (np.concatenate([ax, np.where(alongx, mx, ax)]),
                          np.concatenate([mx, bx]),
                          np.concatenate([ay, np.where(alongx, ay, my)]),
                          np.concatenate([my, by]))
