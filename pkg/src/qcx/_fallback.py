"""Pure numpy implementations of the piecewise-linear kernels.

Every function takes the breakpoint abscissae ``bt``, values ``bh`` and the
slope table ``s`` (``s[0]`` left tail, ``s[n]`` right tail, ``s[i]`` the slope
on ``[bt[i-1], bt[i]]``) and operates on 1-D float arrays of query points.
The compiled module ``qcx._kernels`` exposes the same signatures.
"""

from __future__ import annotations

import numpy as np

_SERIES_CUT = 0.1
_SERIES_TERMS = 17


def pl_eval(bt, bh, s, t):
    t = np.asarray(t, dtype=float)
    i = np.searchsorted(bt, t, side="right")
    j = np.maximum(i - 1, 0)
    return bh[j] + s[i] * (t - bt[j])


def _walk(bt, s, x, y, direction, with_integral):
    """Accumulate h(x + direction*y) - h(x) (signed so the result is positive)
    and the integral of |h - h(x)| over the interval, segment by segment."""
    n = bt.size
    target = x + direction * y
    if direction > 0:
        seg = np.searchsorted(bt, x, side="right")
    else:
        seg = np.searchsorted(bt, x, side="left")
    pos = x.copy()
    incr = np.zeros_like(x)
    area = np.zeros_like(x)
    active = np.ones(x.shape, dtype=bool)
    while active.any():
        idx = np.nonzero(active)[0]
        sg = seg[idx]
        if direction > 0:
            nxt = np.where(sg < n, bt[np.minimum(sg, n - 1)], np.inf)
            end = np.minimum(nxt, target[idx])
            length = end - pos[idx]
        else:
            nxt = np.where(sg > 0, bt[np.maximum(sg - 1, 0)], -np.inf)
            end = np.maximum(nxt, target[idx])
            length = pos[idx] - end
        slope = s[sg]
        if with_integral:
            area[idx] += incr[idx] * length + 0.5 * slope * length * length
        incr[idx] += slope * length
        pos[idx] = end
        finished = end == target[idx]
        active[idx[finished]] = False
        seg[idx[~finished]] += direction
    return incr, area


def pl_increments(bt, bh, s, x, y):
    """Return (d_plus, d_minus, i_plus, i_minus).

    d_plus = h(x+y) - h(x), d_minus = h(x) - h(x-y),
    i_plus = (1/y) * int_x^{x+y} (h - h(x)), i_minus = (1/y) * int_{x-y}^x (h(x) - h).
    """
    x = np.ascontiguousarray(x, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    dp, ap = _walk(bt, s, x, y, +1, True)
    dm, am = _walk(bt, s, x, y, -1, True)
    return dp, dm, ap / y, am / y


def pl_rho(bt, bh, s, x, t):
    x = np.ascontiguousarray(x, dtype=float)
    t = np.ascontiguousarray(t, dtype=float)
    dp, _ = _walk(bt, s, x, t, +1, False)
    dm, _ = _walk(bt, s, x, t, -1, False)
    r = dp / dm
    return np.maximum(r, 1.0 / r)


def log1p_ratio(eps):
    """phi(eps) = log1p(eps)/eps and psi(eps) = (1 - phi(eps))/eps, stable near 0."""
    eps = np.asarray(eps, dtype=float)
    small = np.abs(eps) < _SERIES_CUT
    e_s = np.where(small, eps, 0.0)
    phi_s = np.zeros_like(e_s)
    psi_s = np.zeros_like(e_s)
    power = np.ones_like(e_s)
    for k in range(_SERIES_TERMS):
        sign = -1.0 if k % 2 else 1.0
        phi_s += sign * power / (k + 1)
        psi_s += sign * power / (k + 2)
        power = power * e_s
    e_l = np.where(small, 1.0, eps)
    phi_l = np.log1p(e_l) / e_l
    psi_l = (1.0 - phi_l) / e_l
    return np.where(small, phi_s, phi_l), np.where(small, psi_s, psi_l)


def ratio_integral(n0, d0, n1, d1, length):
    """Exact integral of num/den over an interval where both are linear,
    given endpoint values and the interval length (den > 0)."""
    eps = (d1 - d0) / d0
    phi, psi = log1p_ratio(eps)
    return length * ((n0 / d0) * phi + ((n1 - n0) / d0) * psi)


def _segment_kinks(bt, x, y, sign):
    if sign > 0:
        k1 = bt[None, :] - x[:, None]
        k2 = 0.5 * (bt[None, :] - x[:, None] + y[:, None])
    else:
        k1 = x[:, None] - bt[None, :]
        k2 = 0.5 * (x[:, None] + y[:, None] - bt[None, :])
    w_end = 0.25 * y
    nodes = np.concatenate(
        [np.zeros((x.size, 1)), k1, k2, w_end[:, None]], axis=1)
    nodes = np.clip(nodes, 0.0, w_end[:, None])
    nodes.sort(axis=1)
    return nodes


def segment_pieces(bt, bh, s, x, y, sign):
    """Breakpoints in w of rho along one averaging segment.

    The segment is w -> (x + sign*w, y - w), w in [0, y/4]; on every piece the
    two increments P = h(X+T) - h(X), Q = h(X) - h(X-T) are linear in w.
    """
    x = np.ascontiguousarray(x, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    return _segment_kinks(bt, x, y, sign)


def _pq(bt, bh, s, x, y, w, sign):
    X = x[:, None] + sign * w
    T = y[:, None] - w
    h0 = pl_eval(bt, bh, s, X)
    return pl_eval(bt, bh, s, X + T) - h0, h0 - pl_eval(bt, bh, s, X - T)


def pl_segment_averages(bt, bh, s, x, y):
    """Exact averages of rho over the two segments from (x, y) to
    (x +- y/4, 3y/4). Returns (avg_right, avg_left)."""
    x = np.ascontiguousarray(x, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    out = []
    for sign in (1.0, -1.0):
        w = _segment_kinks(bt, x, y, sign)
        P, Q = _pq(bt, bh, s, x, y, w, sign)
        pa, pb = P[:, :-1], P[:, 1:]
        qa, qb = Q[:, :-1], Q[:, 1:]
        length = w[:, 1:] - w[:, :-1]
        da, db = pa - qa, pb - qb
        cross = da * db < 0
        frac = np.where(cross, da / np.where(cross, da - db, 1.0), 1.0)
        pm = pa + frac * (pb - pa)
        qm = qa + frac * (qb - qa)
        total = np.zeros(x.size)
        for (p0, q0, p1, q1, ln) in (
            (pa, qa, pm, qm, frac * length),
            (pm, qm, pb, qb, (1.0 - frac) * length),
        ):
            mid = (p0 - q0) + (p1 - q1)
            up = mid >= 0
            num0 = np.where(up, p0, q0)
            den0 = np.where(up, q0, p0)
            num1 = np.where(up, p1, q1)
            den1 = np.where(up, q1, p1)
            val = ratio_integral(num0, den0, num1, den1, ln)
            total += np.where(ln > 0, val, 0.0).sum(axis=1)
        out.append(4.0 * total / y)
    return out[0], out[1]
