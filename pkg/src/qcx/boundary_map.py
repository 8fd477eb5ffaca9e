"""Increasing homeomorphisms of the line and lifted circle homeomorphisms.

Piecewise-linear maps with affine tails are the canonical concrete class:
their integrals are exact, so anything checked on them carries no quadrature
error. The built-in analytic families (power, log-singular) have closed-form
antiderivatives as well.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy.special import exp1

from qcx import kernels
from qcx.errors import MapSpecError
from qcx.quadrature import adaptive_gk

TWO_PI = 2.0 * math.pi


class LineHomeo(ABC):
    """An increasing homeomorphism of the real line.

    Subclasses evaluate on numpy arrays. ``antiderivative`` may raise
    ``NotImplementedError``, in which case :func:`integral` falls back to
    adaptive quadrature split at :meth:`kinks`.
    """

    kind = "builtin_family"
    family: str | None = None
    params: dict = {}

    @abstractmethod
    def __call__(self, t):
        ...

    def antiderivative(self, t):
        raise NotImplementedError

    def kinks(self, lo=-np.inf, hi=np.inf) -> np.ndarray:
        """Points in [lo, hi] where the map fails to be smooth."""
        return np.empty(0)

    def piecewise_linear(self, lo: float, hi: float) -> PiecewiseLinear | None:
        """An exact piecewise-linear representation valid on [lo, hi], if any."""
        return None

    def __repr__(self):
        if self.family:
            args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
            return f"{self.family}({args})"
        return f"{type(self).__name__}()"


class PiecewiseLinear(LineHomeo):
    """Linear interpolant through ``points`` continued by affine tails."""

    kind = "piecewise_linear"

    def __init__(self, points, left_slope: float, right_slope: float, *,
                 family: str | None = None, params: dict | None = None):
        pts = np.array(points, dtype=float).reshape(-1, 2)
        if pts.shape[0] < 1:
            raise MapSpecError("at least one breakpoint is required", "$.points")
        if not np.all(np.isfinite(pts)):
            raise MapSpecError("breakpoints must be finite", "$.points")
        for name, slope in (("left_slope", left_slope), ("right_slope", right_slope)):
            if not (math.isfinite(slope) and slope > 0):
                raise MapSpecError(f"{name} must be a positive finite number",
                                   f"$.{name}")
        dt = np.diff(pts[:, 0])
        dh = np.diff(pts[:, 1])
        for k in range(dt.size):
            if not (dt[k] > 0 and dh[k] > 0):
                raise MapSpecError(
                    f"points {k} and {k + 1} are not strictly increasing "
                    f"({pts[k].tolist()} -> {pts[k + 1].tolist()})",
                    f"$.points[{k + 1}]")
        self.bt = np.ascontiguousarray(pts[:, 0])
        self.bh = np.ascontiguousarray(pts[:, 1])
        slopes = np.empty(pts.shape[0] + 1)
        slopes[0] = left_slope
        slopes[-1] = right_slope
        slopes[1:-1] = dh / dt
        self.slopes = slopes
        for arr in (self.bt, self.bh, self.slopes):
            arr.setflags(write=False)
        # cumulative integral from bt[0] to each breakpoint
        cum = np.zeros(pts.shape[0])
        cum[1:] = np.cumsum(0.5 * (self.bh[1:] + self.bh[:-1]) * dt)
        self._cum = cum
        self.family = family
        self.params = params or {}

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.bt, self.bh])

    @property
    def left_slope(self) -> float:
        return float(self.slopes[0])

    @property
    def right_slope(self) -> float:
        return float(self.slopes[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return float(kernels.pl_eval(self.bt, self.bh, self.slopes, t.reshape(1))[0])
        return kernels.pl_eval(self.bt, self.bh, self.slopes, t)

    def antiderivative(self, t):
        t = np.asarray(t, dtype=float)
        i = np.searchsorted(self.bt, t, side="right")
        j = np.maximum(i - 1, 0)
        dt = t - self.bt[j]
        return self._cum[j] + self.bh[j] * dt + 0.5 * self.slopes[i] * dt * dt

    def exact_integral(self, a: float, b: float) -> float:
        """Trapezoid sum over the breakpoints inside [a, b]; exact."""
        nodes = np.concatenate([[a], self.bt[(self.bt > a) & (self.bt < b)], [b]])
        vals = self(nodes)
        return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(nodes)))

    def kinks(self, lo=-np.inf, hi=np.inf):
        return self.bt[(self.bt >= lo) & (self.bt <= hi)].copy()

    def piecewise_linear(self, lo, hi):
        return self

    def __repr__(self):
        if self.family:
            return super().__repr__()
        return (f"PiecewiseLinear(points={self.points.tolist()}, "
                f"left_slope={self.left_slope}, right_slope={self.right_slope})")


def identity() -> PiecewiseLinear:
    return PiecewiseLinear([(0.0, 0.0)], 1.0, 1.0, family="identity")


def two_slope(a: float) -> PiecewiseLinear:
    """h(t) = t for t >= 0 and t/a for t < 0."""
    if not a > 0:
        raise MapSpecError("two_slope parameter a must be positive", "$.params.a")
    return PiecewiseLinear([(0.0, 0.0)], 1.0 / a, 1.0, family="two_slope",
                           params={"a": a})


class PowerMap(LineHomeo):
    """h(t) = sign(t) |t|^alpha."""

    family = "power"

    def __init__(self, alpha: float):
        if not (alpha > 0 and math.isfinite(alpha)):
            raise MapSpecError("power exponent must be positive", "$.params.alpha")
        self.alpha = float(alpha)
        self.params = {"alpha": self.alpha}

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.sign(t) * np.abs(t) ** self.alpha
        return float(out) if out.ndim == 0 else out

    def antiderivative(self, t):
        t = np.asarray(t, dtype=float)
        return np.abs(t) ** (self.alpha + 1.0) / (self.alpha + 1.0)

    def kinks(self, lo=-np.inf, hi=np.inf):
        return np.array([0.0]) if lo <= 0.0 <= hi else np.empty(0)

    def piecewise_linear(self, lo, hi):
        return identity() if self.alpha == 1.0 else None


class LogSingularMap(LineHomeo):
    """h(t) = t for t >= 0, t/(1 - log|t|) on (-1, 0), and the affine
    continuation 2t + 1 (slope matched at -1) for t <= -1.

    The symmetric distortion at the origin is 1 + log(1/t), unbounded.
    """

    family = "log_singular"
    params: dict = {}

    # int_0^{-1} h = e^2 E1(2)
    _F_MINUS_ONE = math.exp(2.0) * float(exp1(2.0))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        mid = (t < 0) & (t > -1)
        safe = np.where(mid, t, -0.5)
        out = np.where(t >= 0, t, np.where(mid, safe / (1.0 - np.log(-safe)), 2.0 * t + 1.0))
        return float(out) if out.ndim == 0 else out

    def antiderivative(self, t):
        t = np.asarray(t, dtype=float)
        mid = (t < 0) & (t > -1)
        safe = np.where(mid, -t, 0.5)
        singular = math.exp(2.0) * exp1(2.0 * (1.0 - np.log(safe)))
        return np.where(t >= 0, 0.5 * t * t,
                        np.where(mid, singular, self._F_MINUS_ONE + t * t + t))

    def kinks(self, lo=-np.inf, hi=np.inf):
        k = np.array([-1.0, 0.0])
        return k[(k >= lo) & (k <= hi)]


def power(alpha: float) -> LineHomeo:
    return PowerMap(alpha)


def log_singular() -> LogSingularMap:
    return LogSingularMap()


def _transform_pl(pl: PiecewiseLinear, A, B, c, d) -> PiecewiseLinear:
    """Exact representation of t -> A*pl(c*t + d) + B (A*c > 0)."""
    t = (pl.bt - d) / c
    h = A * pl.bh + B
    left, right = A * c * pl.slopes[0], A * c * pl.slopes[-1]
    if c < 0:
        t, h = t[::-1], h[::-1]
        left, right = right, left
    return PiecewiseLinear(np.column_stack([t, h]), left, right)


class AffineConjugate(LineHomeo):
    """t -> A * base(c*t + d) + B with A*c > 0."""

    def __init__(self, base: LineHomeo, A: float, B: float, c: float, d: float):
        if not (A * c > 0):
            raise ValueError("affine conjugation must preserve orientation")
        if isinstance(base, AffineConjugate):
            # A*(A0*g(c0*(c*t+d)+d0)+B0)+B
            A, B = A * base.A, A * base.B + B
            c, d = base.c * c, base.c * d + base.d
            base = base.base
        self.base, self.A, self.B, self.c, self.d = base, A, B, c, d
        self.kind = base.kind

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.A * np.asarray(self.base(self.c * t + self.d)) + self.B
        return float(out) if out.ndim == 0 else out

    def antiderivative(self, t):
        t = np.asarray(t, dtype=float)
        return (self.A / self.c) * self.base.antiderivative(self.c * t + self.d) + self.B * t

    def kinks(self, lo=-np.inf, hi=np.inf):
        a, b = sorted((self.c * lo + self.d, self.c * hi + self.d))
        k = (self.base.kinks(a, b) - self.d) / self.c
        return np.sort(k)

    def piecewise_linear(self, lo, hi):
        a, b = sorted((self.c * lo + self.d, self.c * hi + self.d))
        pl = self.base.piecewise_linear(a, b)
        if pl is None:
            return None
        return _transform_pl(pl, self.A, self.B, self.c, self.d)

    def __repr__(self):
        return f"AffineConjugate({self.base!r}, A={self.A}, B={self.B}, c={self.c}, d={self.d})"


def _affine(h: LineHomeo, A, B, c, d) -> LineHomeo:
    if isinstance(h, PiecewiseLinear):
        return _transform_pl(h, A, B, c, d)
    return AffineConjugate(h, A, B, c, d)


@dataclass(frozen=True)
class BA1:
    """h*(t) = a h(t) + b."""
    a: float
    b: float


@dataclass(frozen=True)
class BA2:
    """h*(t) = h(a t + b)."""
    a: float
    b: float


@dataclass(frozen=True)
class BA3:
    """h*(t) = -h(-t)."""


def transform(h: LineHomeo, rule) -> LineHomeo:
    if isinstance(rule, BA1):
        if not rule.a > 0:
            raise ValueError("BA1 requires a > 0")
        return _affine(h, rule.a, rule.b, 1.0, 0.0)
    if isinstance(rule, BA2):
        if not rule.a > 0:
            raise ValueError("BA2 requires a > 0")
        return _affine(h, 1.0, 0.0, rule.a, rule.b)
    if isinstance(rule, BA3):
        return _affine(h, -1.0, 0.0, -1.0, 0.0)
    raise TypeError(f"unknown transformation rule {rule!r}")


def normalize(h: LineHomeo, x: float, y: float) -> LineHomeo:
    """h*(t) = (h(x + y t) - h(x)) / (h(x + y) - h(x)); h*(0) = 0, h*(1) = 1."""
    if not y > 0:
        raise ValueError("normalization needs y > 0")
    h0 = float(h(x))
    scale = float(h(x + y)) - h0
    return _affine(h, 1.0 / scale, -h0 / scale, y, x)


def evaluate(h: LineHomeo, t):
    return h(t)


def integral(h: LineHomeo, a: float, b: float, tol: float = 1e-12) -> float:
    """int_a^b h(t) dt; exact for piecewise-linear maps and closed-form families."""
    if a > b:
        raise ValueError("integral requires a <= b")
    if isinstance(h, PiecewiseLinear):
        return h.exact_integral(a, b)
    pl = h.piecewise_linear(a, b)
    if pl is not None:
        return pl.exact_integral(a, b)
    try:
        F = h.antiderivative(np.array([a, b]))
        return float(F[1] - F[0])
    except NotImplementedError:
        pass
    value, _ = adaptive_gk(h, a, b, points=h.kinks(a, b), atol=tol, rtol=0.0)
    return value


# ---------------------------------------------------------------------------
# circle maps


class PeriodicLift(LineHomeo):
    """h(t) = floor(t) + profile(t - floor(t)) for a profile of [0, 1] onto itself."""

    def __init__(self, profile: LineHomeo):
        p0, p1 = float(profile(0.0)), float(profile(1.0))
        if abs(p0) > 1e-14 or abs(p1 - 1.0) > 1e-14:
            raise MapSpecError("lift profile must fix 0 and 1", "$.samples")
        self.profile = profile
        self.kind = profile.kind
        if isinstance(profile, PiecewiseLinear):
            inside = (profile.bt > 0) & (profile.bt < 1)
            self._cell_kinks = np.concatenate([[0.0], profile.bt[inside]])
        else:
            k = profile.kinks(0.0, 1.0)
            self._cell_kinks = np.unique(np.concatenate([[0.0], k[k < 1.0]]))
        self._period_mean = integral(profile, 0.0, 1.0)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        n = np.floor(t)
        out = n + np.asarray(self.profile(t - n))
        near_one = getattr(self.profile, "near_one", None)
        if near_one is not None:
            # t - (n + 1) is exact here, t - n is not when t sits just below n + 1
            upper = (t - n) > 0.5
            if np.any(upper):
                m = n + 1.0
                g = np.where(upper, t - m, -0.5)
                out = np.where(upper, m + np.asarray(near_one(g)), out)
        return float(out) if out.ndim == 0 else out

    def antiderivative(self, t):
        t = np.asarray(t, dtype=float)
        n = np.floor(t)
        f = t - n
        cell = self.profile.antiderivative(f) - self.profile.antiderivative(np.zeros_like(f))
        return 0.5 * n * (n - 1.0) + n * self._period_mean + n * f + cell

    def kinks(self, lo=-np.inf, hi=np.inf):
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValueError("a periodic lift needs a finite kink window")
        periods = np.arange(math.floor(lo), math.floor(hi) + 1.0)
        k = (periods[:, None] + self._cell_kinks[None, :]).ravel()
        return k[(k >= lo) & (k <= hi)]

    def piecewise_linear(self, lo, hi):
        if not isinstance(self.profile, PiecewiseLinear):
            return None
        n0, n1 = math.floor(lo) - 1, math.floor(hi) + 1
        periods = np.arange(n0, n1 + 1, dtype=float)
        bt = (periods[:, None] + self._cell_kinks[None, :]).ravel()
        return PiecewiseLinear(np.column_stack([bt, self(bt)]), 1.0, 1.0)

    def __repr__(self):
        return f"PeriodicLift({self.profile!r})"


@dataclass(frozen=True)
class CircleHomeo:
    """Orientation-preserving circle homeomorphism

        e^{i theta} -> e^{i (theta0 + 2 pi lift(theta / 2 pi))}.
    """

    lift: LineHomeo
    rotation_offset: float = 0.0

    def angle(self, theta):
        """Unwrapped image angle of e^{i theta}."""
        theta = np.asarray(theta, dtype=float)
        return self.rotation_offset + TWO_PI * np.asarray(self.lift(theta / TWO_PI))

    def __call__(self, theta):
        return np.exp(1j * self.angle(theta))


def lift_circle(samples) -> CircleHomeo:
    """Build a circle map from (theta, image angle) samples.

    ``samples[0]`` must have theta = 0; thetas increase strictly in [0, 2 pi).
    Image angles are unwrapped forward and must advance by less than one turn
    in total. The lift is the piecewise-linear interpolant, extended by
    lift(x + 1) = lift(x) + 1, with the rotation h(1) = e^{i theta0} factored out.
    """
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
        raise MapSpecError("samples must be a list of [theta, angle] pairs", "$.samples")
    if not np.all(np.isfinite(pts)):
        raise MapSpecError("samples must be finite", "$.samples")
    theta, phi = pts[:, 0], pts[:, 1]
    if theta[0] != 0.0:
        raise MapSpecError("the first sample must be at theta = 0", "$.samples[0][0]")
    for k in range(1, theta.size):
        if not theta[k] > theta[k - 1]:
            raise MapSpecError(
                f"thetas of samples {k - 1} and {k} are not strictly increasing",
                f"$.samples[{k}][0]")
    if theta[-1] >= TWO_PI:
        raise MapSpecError("thetas must lie in [0, 2 pi)", f"$.samples[{theta.size - 1}][0]")
    theta0 = float(phi[0])
    unwrapped = [theta0]
    for k in range(1, phi.size):
        step = (phi[k] - unwrapped[-1]) % TWO_PI
        nxt = unwrapped[-1] + step
        if step == 0.0 or nxt - theta0 >= TWO_PI:
            raise MapSpecError(
                f"samples {k - 1} and {k} break monotonicity "
                f"(image angle {float(phi[k - 1])!r} -> {float(phi[k])!r})", f"$.samples[{k}]")
        unwrapped.append(nxt)
    s = theta / TWO_PI
    v = (np.asarray(unwrapped) - theta0) / TWO_PI
    profile_pts = np.column_stack([np.append(s, 1.0), np.append(v, 1.0)])
    profile = PiecewiseLinear(profile_pts, 1.0, 1.0)
    return CircleHomeo(PeriodicLift(profile), theta0)


def circle_from_function(angle_map, n: int) -> CircleHomeo:
    """Sample an image-angle function at n equally spaced thetas and lift it."""
    theta = TWO_PI * np.arange(n) / n
    return lift_circle(np.column_stack([theta, angle_map(theta)]))


def rotation(theta0: float, n: int = 4) -> CircleHomeo:
    return circle_from_function(lambda th: th + theta0, n)


def circle_from_lift(profile: LineHomeo, rotation_offset: float = 0.0) -> CircleHomeo:
    """Circle map whose lift restricted to [0, 1] is ``profile``."""
    return CircleHomeo(PeriodicLift(profile), rotation_offset)


class LogSingularProfile(LineHomeo):
    """Profile of [0, 1] that behaves like the log-singular map at 1 (hence at
    every integer of its periodic lift): b t on [0, 1/2] and 1 + b h(t - 1)
    beyond, with b fixed by continuity at 1/2."""

    family = "log_singular_circle"
    params: dict = {}

    def __init__(self):
        self._h = LogSingularMap()
        self.b = 1.0 / (0.5 - float(self._h(-0.5)))
        self._A_half = 0.125 * self.b
        self._H_half = float(self._h.antiderivative(-0.5))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t <= 0.5, self.b * t, 1.0 + self.b * np.asarray(self._h(t - 1.0)))
        return float(out) if out.ndim == 0 else out

    def near_one(self, g):
        """profile(1 + g) - 1 for g in [-1/2, 0], without rounding 1 + g."""
        return self.b * np.asarray(self._h(np.asarray(g, dtype=float)))

    def antiderivative(self, t):
        t = np.asarray(t, dtype=float)
        right = (self._A_half + (t - 0.5)
                 + self.b * (self._h.antiderivative(np.maximum(t, 0.5) - 1.0) - self._H_half))
        return np.where(t <= 0.5, 0.5 * self.b * t * t, right)

    def kinks(self, lo=-np.inf, hi=np.inf):
        k = np.array([0.5, 1.0])
        return k[(k >= lo) & (k <= hi)]


def log_singular_circle() -> CircleHomeo:
    """Circle map whose circular distortion at theta = 0 is 1 + log(2 pi / t)."""
    return circle_from_lift(LogSingularProfile())
