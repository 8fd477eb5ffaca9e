"""Truncated integrability estimates for distortion functions.

Integrals over the half-plane are taken against the spherical density
4/(1+x^2+y^2)^2 on a box [x_lo, x_hi] x (y_min, y_max], organized in dyadic
y-layers (2^-k-1, 2^-k]. The layer sequence toward the boundary is what the
convergence verdict is read from.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from qcx.boundary_map import TWO_PI, CircleHomeo, LineHomeo
from qcx.distortion import C0, rho, segment_average_of
from qcx.errors import MapSpecError
from qcx.extension import jet
from qcx.quadrature import adaptive_cubature, adaptive_gk

# verdict thresholds
R_CONVERGING = 0.8
TREND_WINDOW = 5
TREND_STEP = 1e-4


@dataclass(frozen=True)
class PhiFamily:
    """Phi(x) in {e^x, x^p, e^{x/log(e+x)}, x}; calling applies Phi(q x)."""

    kind: str = "exp"
    q: float = 1.0
    p: float = 1.0

    def __post_init__(self):
        if self.kind not in ("exp", "power", "subexp", "linear"):
            raise ValueError(f"unknown Phi family {self.kind!r}")
        if not self.q > 0:
            raise ValueError("q must be positive")
        if self.kind == "power" and not self.p >= 1:
            raise ValueError("power family needs p >= 1")

    @classmethod
    def parse(cls, text: str, q: float = 1.0) -> "PhiFamily":
        name, _, arg = text.partition(":")
        name = {"exponential": "exp", "subexponential": "subexp"}.get(name, name)
        if name == "power":
            try:
                return cls("power", q, float(arg))
            except ValueError:
                raise MapSpecError(f"bad exponent in {text!r}", "--phi") from None
        if arg or name not in ("exp", "subexp", "linear"):
            raise MapSpecError(f"unknown Phi {text!r}", "--phi")
        return cls(name, q)

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "exp":
            return np.exp(x)
        if self.kind == "power":
            return np.power(x, self.p)
        if self.kind == "subexp":
            return np.exp(x / np.log(math.e + x))
        return x

    def __call__(self, x):
        return self.phi(self.q * np.asarray(x, dtype=float))

    def label(self) -> str:
        return f"power:{self.p:g}" if self.kind == "power" else self.kind


@dataclass(frozen=True)
class Box:
    x_lo: float
    x_hi: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_lo < self.x_hi and 0 < self.y_min < self.y_max):
            raise ValueError(f"invalid truncation box {self}")

    @classmethod
    def symmetric(cls, X: float = 20.0, y_min: float = 2.0 ** -14, y_max: float = 20.0):
        if not X > 0:
            raise ValueError("X must be positive")
        return cls(-X, X, y_min, y_max)

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_BOX = Box.symmetric()


@dataclass
class Layer:
    k: int
    y_lo: float
    y_hi: float
    value: float
    error: float = 0.0
    full: bool = True
    converged: bool = True

    def as_dict(self) -> dict:
        return {"k": self.k, "y_lo": self.y_lo, "y_hi": self.y_hi, "value": self.value}


@dataclass
class IntegrabilityReport:
    box: Box
    layers: list
    total: float
    verdict: str
    verdict_basis: dict = field(default_factory=dict)

    @property
    def layer_contributions(self):
        return [(L.k, L.value) for L in self.layers]

    def as_dict(self) -> dict:
        return {"box": self.box.as_dict(), "layers": [L.as_dict() for L in self.layers],
                "total": self.total, "verdict": self.verdict,
                "verdict_basis": self.verdict_basis}


def dyadic_layers(y_min: float, y_max: float, scale: float = 1.0):
    """(k, lo, hi, full) for layers (scale 2^-k-1, scale 2^-k] clipped to (y_min, y_max],
    ordered from the top down."""
    k_top = math.floor(-math.log2(y_max / scale))
    out = []
    k = k_top
    while True:
        lo_full, hi_full = scale * 2.0 ** (-k - 1), scale * 2.0 ** (-k)
        lo, hi = max(lo_full, y_min), min(hi_full, y_max)
        if hi <= y_min:
            break
        if hi > lo:
            out.append((k, lo, hi, lo == lo_full and hi == hi_full))
        k += 1
    return out


def classify(values) -> tuple[str, dict]:
    """Read a convergence verdict off the layer contributions toward the boundary.

    converging: the last ratios stay below R_CONVERGING, or stay below 1 with
    no upward trend (geometric decay). diverging: the last ratios are all
    >= 1, or rise steadily toward 1 from above R_CONVERGING (harmonic-type
    decay). Anything else is inconclusive.
    """
    c = np.abs(np.asarray(values, dtype=float))
    basis = {"window": TREND_WINDOW, "r_converging": R_CONVERGING}
    if c.size < TREND_WINDOW + 1:
        basis["reason"] = "too few layers"
        return "inconclusive", basis
    tail = c[-(TREND_WINDOW + 1):]
    if not np.all(np.isfinite(tail)):
        basis["reason"] = "non-finite layer value"
        return "diverging", basis
    scale = max(float(np.max(c)), 1e-300)
    if np.all(tail <= 1e-14 * scale) or np.all(tail == 0.0):
        basis.update(ratios=[0.0] * TREND_WINDOW, reason="vanishing layers")
        return "converging", basis
    with np.errstate(divide="ignore", invalid="ignore"):
        r = tail[1:] / tail[:-1]
    r = np.where(np.isfinite(r), r, np.inf)
    steps = np.diff(r)
    basis.update(
        ratios=[float(v) for v in r],
        max_ratio=float(np.max(r)),
        mean_ratio=float(np.mean(r)),
        trend=float(np.polyfit(np.arange(r.size), np.minimum(r, 1e300), 1)[0]),
    )
    rising = bool(np.all(steps > TREND_STEP))
    if np.all(r >= 1.0):
        basis["reason"] = "non-decaying layers"
        return "diverging", basis
    if rising and r[-1] >= R_CONVERGING:
        basis["reason"] = "ratios rising toward 1"
        return "diverging", basis
    if np.max(r) <= R_CONVERGING or (np.max(r) < 1.0 and not rising
                                      and np.all(steps <= TREND_STEP)):
        rr = float(np.max(r))
        basis["tail_estimate"] = float(tail[-1] * rr / (1.0 - rr))
        basis["reason"] = "geometric decay"
        return "converging", basis
    basis["reason"] = "no clear trend"
    return "inconclusive", basis


def spherical_density(x, y):
    return 4.0 / np.square(1.0 + np.square(x) + np.square(y))


def layered_integral(f, box: Box, *, weight=spherical_density, xsplits=None,
                     tol: float = 1e-8, threads: int = 1, layer_scale: float = 1.0,
                     max_cells: int = 200_000, verdict_layers: int | None = None):
    """Integrate f * weight over ``box`` layer by layer.

    ``xsplits(y_lo, y_hi)`` returns x positions where f has kinks inside a
    layer. ``tol`` is relative per layer. A layer that exhausts its budget
    makes the verdict inconclusive.
    """
    spec = dyadic_layers(box.y_min, box.y_max, layer_scale)

    def g(x, y):
        return np.asarray(f(x, y), dtype=float) * weight(x, y)

    def run(item):
        k, lo, hi, full = item
        pts = () if xsplits is None else np.asarray(xsplits(lo, hi), dtype=float)
        val, err, _, ok = adaptive_cubature(g, box.x_lo, box.x_hi, lo, hi, xsplits=pts,
                                            atol=1e-300, rtol=tol, max_cells=max_cells,
                                            strict=False)
        return Layer(k, lo, hi, val, err, full, ok)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            layers = list(pool.map(run, spec))
    else:
        layers = [run(s) for s in spec]
    total = math.fsum(L.value for L in layers)
    boundary = [L.value for L in layers if L.full and L.k >= 0]
    if verdict_layers is not None:
        boundary = boundary[:verdict_layers]
    verdict, basis = classify(boundary)
    failed = [L.k for L in layers if not L.converged]
    if failed:
        basis["unconverged_layers"] = failed
        verdict = "inconclusive"
    return IntegrabilityReport(box, layers, total, verdict, basis)


def spherical_integral(f, box: Box = DEFAULT_BOX, tol: float = 1e-8, *, xsplits=None,
                       threads: int = 1) -> IntegrabilityReport:
    """Truncated integral of f against the spherical measure over ``box``."""
    return layered_integral(f, box, xsplits=xsplits, tol=tol, threads=threads)


def kink_splits(h: LineHomeo, box: Box):
    """x-splits for integrands built from h(x), h(x +- y): the kinks b and the
    bands b -+ y swept across a layer."""
    lo_x, hi_x = box.x_lo - box.y_max, box.x_hi + box.y_max
    try:
        kinks = np.asarray(h.kinks(lo_x, hi_x), dtype=float)
    except ValueError:
        kinks = np.empty(0)
    if kinks.size > 2000:
        kinks = kinks[(kinks >= box.x_lo - 2) & (kinks <= box.x_hi + 2)]

    def splits(y_lo, y_hi):
        return np.concatenate([kinks, kinks - y_lo, kinks - y_hi, kinks + y_lo,
                               kinks + y_hi])
    return splits


def rho_integral(h: LineHomeo, phi: PhiFamily, box: Box = DEFAULT_BOX, tol: float = 1e-8,
                 threads: int = 1) -> IntegrabilityReport:
    """Truncated spherical integral of Phi(q rho_h)."""
    return spherical_integral(lambda x, y: phi(rho(h, x, y)), box, tol,
                              xsplits=kink_splits(h, box), threads=threads)


def dilatation_integral(h: LineHomeo, phi: PhiFamily, box: Box = DEFAULT_BOX,
                        tol: float = 1e-8, threads: int = 1,
                        scale: float = 1.0 / C0) -> IntegrabilityReport:
    """Truncated spherical integral of Phi(q K_H / C0)."""
    return spherical_integral(lambda x, y: phi(scale * jet(h, x, y).dilatation_K), box, tol,
                              xsplits=kink_splits(h, box), threads=threads)


@dataclass
class TransferCheck:
    left: float
    middle: float
    right: float
    pointwise_ok: bool
    nodes_checked: int
    lower_violations: int
    jensen_violations: int
    ratio_right_middle: float
    reports: dict = field(default_factory=dict, repr=False)

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("left", "middle", "right", "pointwise_ok",
                                           "nodes_checked", "lower_violations",
                                           "jensen_violations", "ratio_right_middle")}
        d["reports"] = {k: v.as_dict() for k, v in self.reports.items()}
        return d


class PointwiseTransfer:
    """Integrand Phi(q K / C0) that checks, at every node it is evaluated on,

        Phi(q rho / (4 C0)) <= Phi(q K / C0) <= max{Phi(q rho), avg Phi(q rho)}

    where avg is the combined segment average. The average is only computed
    where Phi(q K / C0) > Phi(q rho).
    """

    def __init__(self, h: LineHomeo, phi: PhiFamily, slack: float = 1e-8):
        self.h, self.phi, self.slack = h, phi, slack
        self.nodes = 0
        self.lower_violations = 0
        self.jensen_violations = 0

    def check(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        K = jet(self.h, x, y).dilatation_K
        r = rho(self.h, x, y)
        mid = self.phi(K / C0)
        low = self.phi(r / (4.0 * C0))
        top = self.phi(r)
        slack = self.slack * np.maximum(1.0, np.abs(mid))
        self.lower_violations += int(np.count_nonzero(low > mid + slack))
        need = mid > top + slack
        if need.any():
            avg = segment_average_of(self.h, x[need], y[need], self.phi, tol=1e-12)
            self.jensen_violations += int(np.count_nonzero(mid[need] > avg + slack[need]))
        self.nodes += x.size
        return mid

    __call__ = check


def transfer_check(h: LineHomeo, phi: PhiFamily, box: Box = DEFAULT_BOX,
                   tol: float = 1e-8, threads: int = 1) -> TransferCheck:
    """The three truncated integrals of Phi(q rho/(4 C0)), Phi(q K/C0), Phi(q rho)
    and the pointwise inequalities between their integrands at every node of
    the middle one."""
    splits = kink_splits(h, box)
    left = spherical_integral(lambda x, y: phi(rho(h, x, y) / (4.0 * C0)), box, tol,
                              xsplits=splits, threads=threads)
    probe = PointwiseTransfer(h, phi)
    middle = spherical_integral(probe, box, tol, xsplits=splits, threads=1)
    right = spherical_integral(lambda x, y: phi(rho(h, x, y)), box, tol,
                               xsplits=splits, threads=threads)
    ok = probe.lower_violations == 0 and probe.jensen_violations == 0
    return TransferCheck(left.total, middle.total, right.total, ok, probe.nodes,
                         probe.lower_violations, probe.jensen_violations,
                         right.total / middle.total if middle.total else math.inf,
                         {"left": left, "middle": middle, "right": right})


# ---------------------------------------------------------------------------
# circle maps


@dataclass
class CircleIntegrability:
    boundary: IntegrabilityReport
    disk: IntegrabilityReport

    def as_dict(self) -> dict:
        return {"boundary": self.boundary.as_dict(), "disk": self.disk.as_dict()}


def _unit(x, y):
    return np.ones(np.broadcast(x, y).shape)


def circle_integrability(ch: CircleHomeo, phi: PhiFamily, tol: float = 1e-8,
                         n_layers: int = 14, y_max_disk: float = 3.0,
                         threads: int = 1) -> CircleIntegrability:
    """int_0^{2pi} int_0^{pi/2} Phi(q rho^c) dt dtheta and the disk integral
    int_D Phi(q K_H / C0) dx dy on the annulus |z| > exp(-2 pi y_max_disk).

    Both are computed on the lift: theta = 2 pi s, t = 2 pi w with w in
    (0, 1/4], and z = exp(2 pi i (x + iy)) with dxdy = 4 pi^2 e^{-4 pi y}.
    The boundary integral includes the innermost strip t < (pi/2) 2^-n_layers
    as a final partial layer.
    """
    lift = ch.lift
    w_min = 0.25 * 2.0 ** -n_layers
    bbox = Box(0.0, 1.0, w_min, 0.25)
    cell_kinks = np.asarray(lift.kinks(-1.0, 2.0), dtype=float)

    def splits(lo, hi):
        return np.concatenate([cell_kinks, cell_kinks - lo, cell_kinks - hi,
                               cell_kinks + lo, cell_kinks + hi])

    def boundary_f(x, w):
        return phi(rho(lift, x, w))

    def scaled(x, y):
        return np.full(np.broadcast(x, y).shape, TWO_PI ** 2)

    boundary = layered_integral(boundary_f, bbox, weight=scaled, xsplits=splits, tol=tol,
                                threads=threads, layer_scale=0.25)
    g = lambda x, y: TWO_PI ** 2 * boundary_f(x, y)  # noqa: E731
    inner, inner_err = adaptive_gk(
        lambda w: np.array([adaptive_gk(lambda s: g(s, np.full_like(s, wi)), 0.0, 1.0,
                                        points=splits(wi, wi), rtol=tol, atol=1e-300,
                                        strict=False)[0] for wi in w]),
        0.0, w_min, rtol=tol, atol=1e-300, strict=False)
    boundary.layers.append(Layer(n_layers, 0.0, w_min, inner, inner_err, False, True))
    boundary.total = math.fsum(L.value for L in boundary.layers)
    # rescale the layer boundaries to the angle variable t = 2 pi w
    for L in boundary.layers:
        L.y_lo, L.y_hi = TWO_PI * L.y_lo, TWO_PI * L.y_hi
    boundary.box = Box(0.0, TWO_PI, TWO_PI * w_min, TWO_PI * 0.25)

    dbox = Box(0.0, 1.0, 2.0 ** -n_layers, y_max_disk)

    def disk_f(x, y):
        return phi(jet(lift, x, y).dilatation_K / C0)

    def disk_weight(x, y):
        return TWO_PI ** 2 * np.exp(-2.0 * TWO_PI * np.asarray(y))

    disk = layered_integral(disk_f, dbox, weight=disk_weight, xsplits=splits, tol=tol,
                            threads=threads)
    return CircleIntegrability(boundary, disk)


@dataclass
class CriterionCheck:
    sup_ratio: float
    satisfied: bool
    shell_sups: list
    shell_t: list

    def as_dict(self) -> dict:
        return asdict(self)


def _g_values(g, theta):
    if callable(g):
        return np.asarray(g(theta), dtype=float)
    arr = np.asarray(g, dtype=float)
    grid = np.linspace(0.0, TWO_PI, arr.size, endpoint=False)
    return np.interp(theta, grid, arr, period=TWO_PI)


def distortion_criterion_check(ch: CircleHomeo, g=0.0, t_min: float = 1e-10, *,
                               t_max: float = math.exp(-1.0), n_theta: int = 512,
                               per_shell: int = 8, stable_shells: int = 4,
                               rel_growth: float = 1e-3) -> CriterionCheck:
    """sup of rho^c(theta, t) / log((1 + g(theta)) / t) over t in [t_min, t_max].

    The sup is taken shell by shell over t in [t_max 2^-j-1, t_max 2^-j];
    the criterion counts as satisfied when none of the last ``stable_shells``
    shells raises the running sup by more than ``rel_growth``.
    """
    if not t_min > 0:
        raise ValueError("t_min must be positive")
    if callable(g) or np.ndim(g) > 0:
        gfun = g
    else:
        gconst = float(g)
        if gconst < 0:
            raise ValueError("g must be non-negative")
        gfun = lambda th: np.full_like(th, gconst)  # noqa: E731
    theta = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
    kinks = TWO_PI * np.asarray(ch.lift.kinks(0.0, 1.0 - 1e-15), dtype=float)
    theta = np.unique(np.concatenate([theta, kinks]))
    gv = _g_values(gfun, theta)
    if np.any(gv < 0):
        raise ValueError("g must be non-negative")
    n_shells = max(1, math.ceil(math.log2(t_max / t_min)))
    sups, ts = [], []
    for j in range(n_shells):
        hi = t_max * 2.0 ** -j
        lo = max(hi / 2.0, t_min)
        t = np.geomspace(lo, hi, per_shell)
        T, TH = np.meshgrid(t, theta, indexing="ij")
        G = np.broadcast_to(gv, TH.shape)
        ratio = rho(ch.lift, TH / TWO_PI, T / TWO_PI) / np.log((1.0 + G) / T)
        sups.append(float(np.max(ratio)))
        ts.append(float(hi))
    run = np.maximum.accumulate(sups)
    n = len(sups)
    m = min(stable_shells, n - 1)
    satisfied = bool(m <= 0 or run[-1] <= run[n - 1 - m] * (1.0 + rel_growth))
    return CriterionCheck(float(run[-1]), satisfied, sups, ts)


@dataclass
class WeldingL1:
    value: float
    shells: list
    converged: bool
    error: float

    def as_dict(self) -> dict:
        return asdict(self)


def welding_l1_test(ch: CircleHomeo, tol: float = 1e-8, max_shells: int = 60,
                    min_shells: int = 8) -> WeldingL1:
    """int_0^{2pi} int_0^{2pi} |log|h(e^{i theta}) - h(e^{i phi})|| dtheta dphi.

    With theta = 2 pi s and phi = theta + 2 pi d, d in (0, 1), the chord is
    2 |sin(pi (lift(s + d) - lift(s)))|. The d-interval is cut into shells
    2^-k-1 < d < 2^-k and 1 - 2^-k < d < 1 - 2^-k-1 around the diagonal; shells
    are added until a shell contributes less than ``tol`` relative to the sum.
    """
    lift = ch.lift
    kinks = np.asarray(lift.kinks(-1.0, 2.0), dtype=float)
    kinks = kinks[(kinks >= 0) & (kinks <= 1)]

    def integrand(s, d):
        diff = np.asarray(lift(s + d)) - np.asarray(lift(s))
        chord = 2.0 * np.abs(np.sin(np.pi * diff))
        return np.abs(np.log(chord))

    def s_splits(d_lo, d_hi):
        return np.concatenate([kinks, kinks - d_lo, kinks - d_hi, kinks - d_lo + 1.0,
                               kinks - d_hi + 1.0])

    def shell(d_lo, d_hi):
        pts = s_splits(d_lo, d_hi)
        val, err, _, ok = adaptive_cubature(integrand, 0.0, 1.0, d_lo, d_hi, xsplits=pts,
                                            atol=1e-300, rtol=tol, strict=False)
        return val, err, ok

    core, core_err, ok_all = shell(0.25, 0.75)
    total = core
    err_total = core_err
    shells = [core]
    converged = False
    for k in range(2, max_shells):
        a, e1, ok1 = shell(2.0 ** (-k - 1), 2.0 ** -k)
        b, e2, ok2 = shell(1.0 - 2.0 ** -k, 1.0 - 2.0 ** (-k - 1))
        contrib = a + b
        shells.append(contrib)
        total += contrib
        err_total += e1 + e2
        ok_all = ok_all and ok1 and ok2
        if k >= min_shells and abs(contrib) < tol * abs(total):
            converged = True
            break
    scale = TWO_PI ** 2
    return WeldingL1(scale * total, [scale * c for c in shells], converged and ok_all,
                     scale * err_total)
