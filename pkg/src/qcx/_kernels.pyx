# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled piecewise-linear kernels; same signatures as ``qcx._fallback``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log1p, fabs, INFINITY
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double SERIES_CUT = 0.1
cdef int SERIES_TERMS = 17


cdef inline Py_ssize_t _search_right(const double[::1] bt, double t) noexcept nogil:
    # number of breakpoints <= t
    cdef Py_ssize_t lo = 0, hi = bt.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if bt[mid] <= t:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline Py_ssize_t _search_left(const double[::1] bt, double t) noexcept nogil:
    # number of breakpoints < t
    cdef Py_ssize_t lo = 0, hi = bt.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if bt[mid] < t:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline double _eval(const double[::1] bt, const double[::1] bh,
                         const double[::1] s, double t) noexcept nogil:
    cdef Py_ssize_t i = _search_right(bt, t)
    cdef Py_ssize_t j = i - 1 if i > 0 else 0
    return bh[j] + s[i] * (t - bt[j])


cdef inline void _walk(const double[::1] bt, const double[::1] s, double x,
                       double y, int direction, double* incr,
                       double* area) noexcept nogil:
    cdef Py_ssize_t n = bt.shape[0]
    cdef Py_ssize_t seg
    cdef double target = x + direction * y
    cdef double pos = x, nxt, end, length, slope
    cdef double d = 0.0, a = 0.0
    if direction > 0:
        seg = _search_right(bt, x)
    else:
        seg = _search_left(bt, x)
    while True:
        if direction > 0:
            nxt = bt[seg] if seg < n else INFINITY
            end = nxt if nxt < target else target
            length = end - pos
        else:
            nxt = bt[seg - 1] if seg > 0 else -INFINITY
            end = nxt if nxt > target else target
            length = pos - end
        slope = s[seg]
        a += d * length + 0.5 * slope * length * length
        d += slope * length
        pos = end
        if end == target:
            break
        seg += direction
    incr[0] = d
    area[0] = a


def pl_eval(const double[::1] bt, const double[::1] bh, const double[::1] s, t):
    cdef double[::1] tv = np.ascontiguousarray(t, dtype=float).ravel()
    cdef Py_ssize_t m = tv.shape[0], k
    out = np.empty(m)
    cdef double[::1] ov = out
    with nogil:
        for k in range(m):
            ov[k] = _eval(bt, bh, s, tv[k])
    return out.reshape(np.shape(t))


def pl_increments(const double[::1] bt, const double[::1] bh,
                  const double[::1] s, x, y):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=float)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=float)
    cdef Py_ssize_t m = xv.shape[0], k
    dp = np.empty(m)
    dm = np.empty(m)
    ip = np.empty(m)
    im = np.empty(m)
    cdef double[::1] dpv = dp, dmv = dm, ipv = ip, imv = im
    cdef double d, a
    with nogil:
        for k in range(m):
            _walk(bt, s, xv[k], yv[k], 1, &d, &a)
            dpv[k] = d
            ipv[k] = a / yv[k]
            _walk(bt, s, xv[k], yv[k], -1, &d, &a)
            dmv[k] = d
            imv[k] = a / yv[k]
    return dp, dm, ip, im


def pl_rho(const double[::1] bt, const double[::1] bh, const double[::1] s, x, t):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=float)
    cdef double[::1] tv = np.ascontiguousarray(t, dtype=float)
    cdef Py_ssize_t m = xv.shape[0], k
    out = np.empty(m)
    cdef double[::1] ov = out
    cdef double dp, dm, a, r
    with nogil:
        for k in range(m):
            _walk(bt, s, xv[k], tv[k], 1, &dp, &a)
            _walk(bt, s, xv[k], tv[k], -1, &dm, &a)
            r = dp / dm
            ov[k] = r if r >= 1.0 / r else 1.0 / r
    return out


cdef inline void _log1p_ratio(double eps, double* phi, double* psi) noexcept nogil:
    cdef double p = 1.0, f = 0.0, g = 0.0, sign
    cdef int k
    if fabs(eps) < SERIES_CUT:
        for k in range(SERIES_TERMS):
            sign = -1.0 if k % 2 else 1.0
            f += sign * p / (k + 1)
            g += sign * p / (k + 2)
            p *= eps
        phi[0] = f
        psi[0] = g
    else:
        f = log1p(eps) / eps
        phi[0] = f
        psi[0] = (1.0 - f) / eps


cdef inline double _ratio_integral(double n0, double d0, double n1, double d1,
                                   double length) noexcept nogil:
    cdef double phi, psi
    _log1p_ratio((d1 - d0) / d0, &phi, &psi)
    return length * ((n0 / d0) * phi + ((n1 - n0) / d0) * psi)


cdef inline double _piece(double p0, double q0, double p1, double q1,
                          double length) noexcept nogil:
    if length <= 0.0:
        return 0.0
    if (p0 - q0) + (p1 - q1) >= 0.0:
        return _ratio_integral(p0, q0, p1, q1, length)
    return _ratio_integral(q0, p0, q1, p1, length)


cdef int _cmp(const void* a, const void* b) noexcept nogil:
    cdef double u = (<double*>a)[0], v = (<double*>b)[0]
    return (u > v) - (u < v)


cdef extern from "stdlib.h":
    void qsort(void* base, size_t nmemb, size_t size,
               int (*compar)(const void*, const void*) noexcept nogil) nogil


cdef double _segment(const double[::1] bt, const double[::1] bh,
                     const double[::1] s, double x, double y, double sign,
                     double* w) noexcept nogil:
    cdef Py_ssize_t n = bt.shape[0], i, m = 0
    cdef double w_end = 0.25 * y, v, total = 0.0
    cdef double X, T, h0, pa, qa, pb, qb, da, db, frac, pm, qm
    w[m] = 0.0
    m += 1
    for i in range(n):
        if sign > 0:
            v = bt[i] - x
        else:
            v = x - bt[i]
        if 0.0 < v < w_end:
            w[m] = v
            m += 1
        if sign > 0:
            v = 0.5 * (bt[i] - x + y)
        else:
            v = 0.5 * (x + y - bt[i])
        if 0.0 < v < w_end:
            w[m] = v
            m += 1
    w[m] = w_end
    m += 1
    qsort(w, m, sizeof(double), _cmp)
    X = x
    T = y
    h0 = _eval(bt, bh, s, X)
    pa = _eval(bt, bh, s, X + T) - h0
    qa = h0 - _eval(bt, bh, s, X - T)
    for i in range(1, m):
        X = x + sign * w[i]
        T = y - w[i]
        h0 = _eval(bt, bh, s, X)
        pb = _eval(bt, bh, s, X + T) - h0
        qb = h0 - _eval(bt, bh, s, X - T)
        da = pa - qa
        db = pb - qb
        if da * db < 0:
            frac = da / (da - db)
        else:
            frac = 1.0
        pm = pa + frac * (pb - pa)
        qm = qa + frac * (qb - qa)
        total += _piece(pa, qa, pm, qm, frac * (w[i] - w[i - 1]))
        total += _piece(pm, qm, pb, qb, (1.0 - frac) * (w[i] - w[i - 1]))
        pa = pb
        qa = qb
    return 4.0 * total / y


def pl_segment_averages(const double[::1] bt, const double[::1] bh,
                        const double[::1] s, x, y):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=float)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=float)
    cdef Py_ssize_t m = xv.shape[0], k
    right = np.empty(m)
    left = np.empty(m)
    cdef double[::1] rv = right, lv = left
    cdef double* w = <double*>malloc((2 * bt.shape[0] + 2) * sizeof(double))
    if w == NULL:
        raise MemoryError()
    try:
        with nogil:
            for k in range(m):
                rv[k] = _segment(bt, bh, s, xv[k], yv[k], 1.0, w)
                lv[k] = _segment(bt, bh, s, xv[k], yv[k], -1.0, w)
    finally:
        free(w)
    return right, left
