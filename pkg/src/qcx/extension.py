"""The Beurling-Ahlfors extension H = u + iv, its first-order jet and dilatation.

All partial derivatives come from closed forms in four local quantities of h
at (x, y):

    d+ = h(x+y) - h(x)                d- = h(x) - h(x-y)
    I+ = (1/y) int_x^{x+y} (h - h(x))  I- = (1/y) int_{x-y}^x (h(x) - h)

in terms of which

    u = h(x) + (I+ - I-)/2,  v = (I+ + I-)/2,
    2y u_x = d+ + d-,         2y u_y = d+ - d- - I+ + I-,
    2y v_x = d+ - d-,         2y v_y = d+ + d- - I+ - I-.

Working relative to h(x) keeps the partials accurate as y -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from qcx import kernels
from qcx.boundary_map import TWO_PI, CircleHomeo, LineHomeo
from qcx.errors import ConsistencyError
from qcx.quadrature import adaptive_gk


@dataclass(frozen=True)
class PointH:
    x: float
    y: float

    def __post_init__(self):
        if not (self.y > 0 and math.isfinite(self.y) and math.isfinite(self.x)):
            raise ValueError(f"point ({self.x}, {self.y}) is not in the upper half-plane")


@dataclass
class ExtensionJet:
    """Value, partials, Jacobian, trace ratio and dilatation at one or more points.

    Fields are floats for a single point and arrays for a batch.
    """

    u: float
    v: float
    u_x: float
    u_y: float
    v_x: float
    v_y: float
    jacobian: float
    trace_T: float
    dilatation_K: float

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _as_arrays(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scalar = x.ndim == 0 and y.ndim == 0
    x, y = np.broadcast_arrays(np.atleast_1d(x), np.atleast_1d(y))
    if np.any(~(y > 0)):
        raise ValueError("extension is only evaluated for y > 0")
    return np.ascontiguousarray(x.ravel()), np.ascontiguousarray(y.ravel()), scalar, x.shape


def local_increments(h: LineHomeo, x, y, tol: float = 1e-12):
    """(d+, d-, I+, I-) for 1-D arrays x, y (see the module docstring)."""
    x = np.ascontiguousarray(x, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    if x.size == 0:
        e = np.empty(0)
        return e, e, e, e
    pl = h.piecewise_linear(float(np.min(x - y)), float(np.max(x + y)))
    if pl is not None:
        return kernels.pl_increments(pl.bt, pl.bh, pl.slopes, x, y)
    hx = np.asarray(h(x))
    dp = np.asarray(h(x + y)) - hx
    dm = hx - np.asarray(h(x - y))
    try:
        F0 = h.antiderivative(x)
        ip = (h.antiderivative(x + y) - F0) / y - hx
        im = hx - (F0 - h.antiderivative(x - y)) / y
    except NotImplementedError:
        ip = np.empty_like(x)
        im = np.empty_like(x)
        for k in range(x.size):
            xk, yk, hk = x[k], y[k], hx[k]
            ip[k] = adaptive_gk(lambda t: h(t) - hk, xk, xk + yk,
                                points=h.kinks(xk, xk + yk), atol=tol * yk, rtol=0.0)[0] / yk
            im[k] = adaptive_gk(lambda t: hk - h(t), xk - yk, xk,
                                points=h.kinks(xk - yk, xk), atol=tol * yk, rtol=0.0)[0] / yk
    return dp, dm, ip, im


def dilatation_from_trace(T):
    """Root K >= 1 of K + 1/K = T, with T clamped below at 2."""
    T = np.maximum(np.asarray(T, dtype=float), 2.0)
    return 0.5 * (T + np.sqrt((T - 2.0) * (T + 2.0)))


def extend(h: LineHomeo, x, y, tol: float = 1e-12):
    """Return (u, v) of the Beurling-Ahlfors extension at (x, y)."""
    xa, ya, scalar, shape = _as_arrays(x, y)
    dp, dm, ip, im = local_increments(h, xa, ya, tol)
    u = np.asarray(h(xa)) + 0.5 * (ip - im)
    v = 0.5 * (ip + im)
    if scalar:
        return float(u[0]), float(v[0])
    return u.reshape(shape), v.reshape(shape)


def jet_from_increments(y, dp, dm, ip, im, u=None, v=None, tol: float = 1e-10):
    y2 = 2.0 * y
    u_x = (dp + dm) / y2
    u_y = (dp - dm - ip + im) / y2
    v_x = (dp - dm) / y2
    v_y = (dp + dm - ip - im) / y2
    J = u_x * v_y - u_y * v_x
    if np.any(~(J > 0)):
        raise ConsistencyError("non-positive Jacobian of the extension")
    T = (u_x * u_x + u_y * u_y + v_x * v_x + v_y * v_y) / J
    if np.any(T < 2.0 - 10.0 * tol):
        raise ConsistencyError(f"trace ratio below 2 (min {float(np.min(T))!r})")
    K = dilatation_from_trace(T)
    return ExtensionJet(u, v, u_x, u_y, v_x, v_y, J, T, K)


def jet(h: LineHomeo, x, y, tol: float = 1e-10) -> ExtensionJet:
    """Closed-form jet of the extension at (x, y); vectorized over arrays."""
    xa, ya, scalar, shape = _as_arrays(x, y)
    dp, dm, ip, im = local_increments(h, xa, ya, min(tol, 1e-12))
    u = np.asarray(h(xa)) + 0.5 * (ip - im)
    v = 0.5 * (ip + im)
    j = jet_from_increments(ya, dp, dm, ip, im, u, v, tol)
    if scalar:
        return ExtensionJet(**{k: float(np.asarray(val)[0]) for k, val in j.as_dict().items()})
    return ExtensionJet(**{k: np.asarray(val).reshape(shape) for k, val in j.as_dict().items()})


def dilatation(h: LineHomeo, x, y, tol: float = 1e-10):
    return jet(h, x, y, tol).dilatation_K


# ---------------------------------------------------------------------------
# circle maps


def disk_to_strip(z):
    """psi^{-1}(z) = log(z) / (2 pi i), branch cut on the non-negative real axis,
    landing in [0, 1) x (0, inf)."""
    z = np.asarray(z, dtype=complex)
    x = np.mod(np.angle(z), TWO_PI) / TWO_PI
    x = np.where(x >= 1.0, 0.0, x)
    y = -np.log(np.abs(z)) / TWO_PI
    return x, y


def strip_to_disk(x, y):
    """psi(x + iy) = exp(2 pi i (x + iy))."""
    return np.exp(TWO_PI * (1j * np.asarray(x) - np.asarray(y)))


def extend_circle(ch: CircleHomeo, z, tol: float = 1e-12):
    """Extension of a circle map to the disk through the universal cover."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    za = np.atleast_1d(z).ravel()
    mod = np.abs(za)
    if np.any(mod >= 1.0):
        raise ValueError("extend_circle is defined on the open unit disk")
    out = np.zeros(za.shape, dtype=complex)
    inner = mod > 0
    if inner.any():
        x, y = disk_to_strip(za[inner])
        u, v = extend(ch.lift, x, y, tol)
        out[inner] = np.exp(1j * ch.rotation_offset) * strip_to_disk(u, v)
    if scalar:
        return complex(out[0])
    return out.reshape(z.shape)
