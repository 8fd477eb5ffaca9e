"""Slow reference computations used to validate the fast paths.

Jets come from finite differences of the extension values (never from the
closed-form partials), integrals from QUADPACK (scipy) or brute composite
Gauss rules instead of the package's own quadrature, and the distortion
from direct scalar evaluations of h.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from qcx.boundary_map import LineHomeo, TWO_PI, identity, log_singular, two_slope
from qcx.extension import ExtensionJet, extend, jet


@dataclass(frozen=True)
class OracleConfig:
    fd_step_relative: float = 1e-4
    richardson_levels: int = 2
    brute_subdivisions: int = 400

    def __post_init__(self):
        if not 0 < self.fd_step_relative < 1e-2:
            raise ValueError("fd_step_relative must lie in (0, 1e-2)")
        if self.richardson_levels < 1:
            raise ValueError("richardson_levels must be >= 1")
        if self.brute_subdivisions < 2:
            raise ValueError("brute_subdivisions must be >= 2")


DEFAULT = OracleConfig()


def _kink_lines(h, x, y):
    """Distances from (x, y) to the lines x = b, x + y = b, x - y = b, per direction."""
    try:
        k = np.asarray(h.kinks(x - 2 * y - 1, x + 2 * y + 1), dtype=float)
    except ValueError:
        k = np.empty(0)
    if k.size == 0:
        return math.inf, math.inf
    plus = np.abs(x + y - k)
    minus = np.abs(x - y - k)
    at = np.abs(x - k)
    # a step in x crosses all three families, a step in y only the slanted ones
    return float(min(plus.min(), minus.min(), at.min())), float(min(plus.min(), minus.min()))


def _richardson(f, z, step, levels, side=0):
    """Derivative of f at z. side=0 central; side=+1/-1 one-sided."""
    def diff(d):
        if side == 0:
            return (f(z + d) - f(z - d)) / (2.0 * d)
        return side * (-3.0 * f(z) + 4.0 * f(z + side * d) - f(z + 2 * side * d)) / (2.0 * d)

    table = [diff(step / 2.0 ** i) for i in range(levels + 1)]
    order = 2
    for _ in range(levels):
        fac = 2.0 ** order
        table = [(fac * table[i + 1] - table[i]) / (fac - 1.0) for i in range(len(table) - 1)]
        order += 1 if side else 2
    return table[0]


def fd_jet(h: LineHomeo, x: float, y: float, cfg: OracleConfig = DEFAULT):
    """(u_x, u_y, v_x, v_y) by Richardson-extrapolated differences of extend.

    The step is fd_step_relative * y, shrunk so the stencil does not cross a
    line where the partials have a kink; when such a line is too close a
    one-sided stencil on the far side is used.
    """
    x, y = float(x), float(y)
    step = cfg.fd_step_relative * y
    dist_x, dist_y = _kink_lines(h, x, y)

    def plan(dist):
        # stencil reaches 1 step each way for central differences
        if dist >= 2.0 * step:
            return step, 0
        if dist >= 1e-3 * step:
            return dist / 2.5, 0
        return step, 1

    sx, side_x = plan(dist_x)
    sy, side_y = plan(dist_y)
    dxv = _richardson(lambda t: np.array(extend(h, t, y)), x, sx, cfg.richardson_levels, side_x)
    dyv = _richardson(lambda t: np.array(extend(h, x, t)), y, sy, cfg.richardson_levels, side_y)
    return float(dxv[0]), float(dyv[0]), float(dxv[1]), float(dyv[1])


def norm_dilatation(j: ExtensionJet) -> float:
    """||DH||^2 / J with ||DH|| the largest singular value of [[u_x, u_y], [v_x, v_y]]."""
    J = j.u_x * j.v_y - j.u_y * j.v_x
    if not J > 0:
        raise ValueError("norm_dilatation needs a positive Jacobian")
    a = j.u_x * j.u_x + j.v_x * j.v_x
    b = j.u_x * j.u_y + j.v_x * j.v_y
    c = j.u_y * j.u_y + j.v_y * j.v_y
    lam = 0.5 * (a + c) + math.hypot(0.5 * (a - c), b)
    return lam / J


def brute_integral(f, region, n: int = DEFAULT.brute_subdivisions, order: int = 4) -> float:
    """Composite order-point Gauss rule on an n x n uniform partition of
    region = (x0, x1, y0, y1); f is vectorized in (x, y)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    x0, x1, y0, y1 = region
    t, w = np.polynomial.legendre.leggauss(order)
    ex = np.linspace(x0, x1, n + 1)
    ey = np.linspace(y0, y1, n + 1)
    hx, hy = 0.5 * np.diff(ex), 0.5 * np.diff(ey)
    xs = ((ex[:-1] + ex[1:]) * 0.5)[:, None] + hx[:, None] * t
    ys = ((ey[:-1] + ey[1:]) * 0.5)[:, None] + hy[:, None] * t
    wx = (hx[:, None] * w).ravel()
    wy = (hy[:, None] * w).ravel()
    total = 0.0
    for j in range(ys.size):
        yv = ys.flat[j]
        total += wy[j] * float(np.dot(np.asarray(f(xs.ravel(), np.full(xs.size, yv))), wx))
    return total


def quad(f, a, b, points=(), tol=1e-13):
    """Scalar QUADPACK integral with breakpoints."""
    pts = sorted(p for p in points if a < p < b)
    val, _ = integrate.quad(f, a, b, points=pts or None, epsabs=tol, epsrel=tol, limit=500)
    return float(val)


def rho_direct(h, x, t):
    hx = float(h(x))
    r = (float(h(x + t)) - hx) / (hx - float(h(x - t)))
    return max(r, 1.0 / r)


def brute_segment_averages(h: LineHomeo, x: float, y: float):
    """(avg_right, avg_left) by QUADPACK with the kink crossings as breakpoints."""
    k = np.asarray(h.kinks(x - y - 1, x + y + 1), dtype=float)
    right_pts = np.concatenate([k - x, 0.5 * (k - x + y)])
    left_pts = np.concatenate([x - k, 0.5 * (x + y - k)])
    q = 0.25 * y
    right = quad(lambda w: rho_direct(h, x + w, y - w), 0.0, q, right_pts) / q
    left = quad(lambda w: rho_direct(h, x - w, y - w), 0.0, q, left_pts) / q
    return right, left


def brute_triple(h: LineHomeo, x: float, y: float):
    """beta, xi, eta from the definition, integrating h directly."""
    hx = float(h(x))
    scale = float(h(x + y)) - hx
    hs = lambda t: (float(h(x + y * t)) - hx) / scale  # noqa: E731
    k = np.asarray(h.kinks(x - y, x + y), dtype=float)
    pts = (k - x) / y
    beta = -hs(-1.0)
    xi = 1.0 - quad(hs, 0.0, 1.0, pts)
    eta = 1.0 + quad(hs, -1.0, 0.0, pts) / beta
    return beta, xi, eta


def relative_jet_error(h: LineHomeo, x: float, y: float, cfg: OracleConfig = DEFAULT):
    """max |fd - closed form| over the four partials, divided by the Frobenius
    norm of the closed-form differential."""
    j = jet(h, x, y)
    fd = np.array(fd_jet(h, x, y, cfg))
    cf = np.array([j.u_x, j.u_y, j.v_x, j.v_y])
    return float(np.max(np.abs(fd - cf)) / np.linalg.norm(cf))


# ---------------------------------------------------------------------------
# golden values


def _ball_log_shift(factor):
    """Mean of log(1/y') over B((0, 1), factor) minus log(1/1), and the mean
    oscillation of log(1/y') on that ball."""
    R = factor

    def chord(yv):
        return 2.0 * math.sqrt(max(R * R - (yv - 1.0) ** 2, 0.0))

    area = math.pi * R * R
    mean = quad(lambda yv: -math.log(yv) * chord(yv), 1.0 - R, 1.0 + R) / area
    cut = math.exp(-mean)
    osc = quad(lambda yv: abs(-math.log(yv) - mean) * chord(yv), 1.0 - R, 1.0 + R,
               [cut]) / area
    return mean, osc


def golden_values() -> dict:
    """Reference values computed by the brute paths above."""
    h = two_slope(2.0)
    beta, xi, eta = brute_triple(h, 0.0, 1.0)
    T = (beta * (1 + eta * eta) + (1 + xi * xi) / beta) / (xi + eta)
    right, left = brute_segment_averages(h, 0.0, 1.0)
    fd = fd_jet(h, 0.0, 1.0)

    ls = log_singular()
    ls_int = quad(lambda t: float(ls(t)), -1.0, 0.0)

    # spherical mass of the half-plane: half of 2 pi int_0^inf 4r/(1+r^2)^2 dr
    mass = math.pi * quad(lambda r: 4.0 * r / (1.0 + r * r) ** 2, 0.0, math.inf)

    weld = TWO_PI ** 2 * quad(lambda d: abs(math.log(2.0 * math.sin(math.pi * d))),
                              0.0, 1.0, [1.0 / 6.0, 5.0 / 6.0])

    rect_shift = brute_integral(lambda x, y: -np.log(y), (-1.0, 1.0, 0.5, 1.5), n=64,
                                order=8) / 2.0
    ball_mean_half, _ = _ball_log_shift(0.5)
    _, osc_quarter = _ball_log_shift(0.25)
    _, osc_big = _ball_log_shift(0.5 * (1.0 - 2.0 ** -6))

    return {
        "two_slope_2_at_0_1": {
            "beta": beta, "xi": xi, "eta": eta, "trace_T": T,
            "dilatation_K": 0.5 * (T + math.sqrt(T * T - 4.0)),
            "avg_right": right, "avg_left": left, "avg_combined": 0.5 * (right + left),
            "u_x": fd[0], "u_y": fd[1], "v_x": fd[2], "v_y": fd[3],
        },
        "identity_at_0_1": dict(zip(("u_x", "u_y", "v_x", "v_y"), fd_jet(identity(), 0.0, 1.0))),
        "log_singular_integral_m1_0": ls_int,
        "spherical_mass_half_plane": mass,
        "welding_l1_identity": weld,
        "rect_log_shift": rect_shift,
        "ball_log_shift": ball_mean_half,
        "ball_log_oscillation_r025": osc_quarter,
        "ball_log_oscillation_r049": osc_big,
    }


def write_goldens(path) -> dict:
    values = golden_values()
    with open(path, "w") as fh:
        json.dump(values, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return values
