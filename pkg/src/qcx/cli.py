"""Command-line interface: ``qcx <command> [options]``.

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 bound violation.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from qcx import bmo, distortion, integrability as integ, oracle
from qcx.boundary_map import CircleHomeo, PiecewiseLinear, PeriodicLift
from qcx.errors import ConsistencyError, MapSpecError, QuadratureError
from qcx.extension import extend, extend_circle, jet
from qcx.grid import GridSpec, map_rows
from qcx.mapspec import load_map
from qcx.output import csv_text, dumps, open_out
from qcx.render import RenderSpec, render

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_VIOLATION = 0, 2, 3, 4

JET_COLUMNS = ("x", "y", "u", "v", "ux", "uy", "vx", "vy", "J", "K")


class InputError(Exception):
    pass


def seed() -> int:
    raw = os.environ.get("QCX_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"QCX_SEED must be an integer, got {raw!r}") from None


def is_exact(h) -> bool:
    """True when all integrals of h are exact (piecewise-linear maps and lifts)."""
    if isinstance(h, CircleHomeo):
        h = h.lift
    if isinstance(h, PeriodicLift):
        h = h.profile
    return isinstance(h, PiecewiseLinear)


def tolerance(args, h=None) -> float:
    if args.tol is not None:
        return args.tol
    return 1e-10 if h is not None and is_exact(h) else 1e-8


def _floats(text, n, flag):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"{flag}: expected {n} comma-separated numbers") from None
    if len(vals) != n or not all(math.isfinite(v) for v in vals):
        raise InputError(f"{flag}: expected {n} comma-separated finite numbers")
    return vals


def _need_map(args):
    if not args.map:
        raise InputError("--map FILE is required")
    return load_map(args.map)


def _need_line(h, what):
    if isinstance(h, CircleHomeo):
        raise InputError(f"{what} needs a line map, not a circle map")
    return h


def _grid(args, required=True):
    if args.grid is None:
        if required:
            raise InputError("--grid x0,x1,y0,y1,nx,ny is required")
        return None
    return GridSpec.parse(args.grid)


def _emit(args, text):
    with open_out(args.out) as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_jet(args):
    h = _need_line(_need_map(args), "jet")
    tol = tolerance(args, h)
    grid = _grid(args, required=args.point is None)
    if args.point is not None:
        x, y = _floats(args.point, 2, "--point")
        if not y > 0:
            raise InputError("--point must have y > 0")
        _emit(args, dumps(jet(h, x, y, tol).as_dict()))
        return EXIT_OK

    def rows(x, y):
        j = jet(h, x, y, tol)
        return {"x": x, "y": y, "u": j.u, "v": j.v, "ux": j.u_x, "uy": j.u_y, "vx": j.v_x,
                "vy": j.v_y, "J": j.jacobian, "K": j.dilatation_K}

    _emit(args, csv_text(JET_COLUMNS, map_rows(rows, grid, args.threads)))
    return EXIT_OK


def cmd_extend(args):
    h = _need_map(args)
    tol = tolerance(args, h)
    if isinstance(h, CircleHomeo):
        if args.point is None:
            raise InputError("extend on a circle map needs --point re,im with |z| < 1")
        a, b = _floats(args.point, 2, "--point")
        if not abs(complex(a, b)) < 1:
            raise InputError("--point must lie in the open unit disk")
        w = extend_circle(h, complex(a, b), tol)
        _emit(args, dumps({"re": w.real, "im": w.imag}))
        return EXIT_OK
    if args.point is not None:
        x, y = _floats(args.point, 2, "--point")
        if not y > 0:
            raise InputError("--point must have y > 0")
        u, v = extend(h, x, y, tol)
        _emit(args, dumps({"u": u, "v": v}))
        return EXIT_OK
    grid = _grid(args)

    def rows(x, y):
        u, v = extend(h, x, y, tol)
        return {"x": x, "y": y, "u": u, "v": v}

    _emit(args, csv_text(("x", "y", "u", "v"), map_rows(rows, grid, args.threads)))
    return EXIT_OK


def cmd_rho(args):
    h = _need_map(args)
    tol = tolerance(args, h)
    if isinstance(h, CircleHomeo):
        if args.point is None:
            raise InputError("rho on a circle map needs --point theta,t")
        th, t = _floats(args.point, 2, "--point")
        if not 0 < t < math.pi / 2:
            raise InputError("--point needs 0 < t < pi/2 for circle maps")
        _emit(args, dumps({"theta": th, "t": t, "rho": distortion.rho_circular(h, th, t)}))
        return EXIT_OK
    if args.point is not None:
        x, y = _floats(args.point, 2, "--point")
        if not y > 0:
            raise InputError("--point must have t > 0")
        s = distortion.segment_average(h, x, y, tol)
        _emit(args, dumps({"x": x, "y": y, "rho": s.rho, "avg_right": s.avg_right,
                           "avg_left": s.avg_left, "avg_combined": s.avg_combined}))
        return EXIT_OK
    grid = _grid(args)

    def rows(x, y):
        s = distortion.segment_average(h, x, y, tol)
        return {"x": x, "y": y, "rho": s.rho, "avg_left": s.avg_left,
                "avg_right": s.avg_right, "avg_combined": s.avg_combined}

    _emit(args, csv_text(("x", "y", "rho", "avg_left", "avg_right", "avg_combined"),
                         map_rows(rows, grid, args.threads)))
    return EXIT_OK


def cmd_bounds(args):
    h = _need_line(_need_map(args), "bounds")
    grid = _grid(args)
    tol = args.tol if args.tol is not None else (1e-9 if is_exact(h) else 1e-7)

    def rows(x, y):
        return distortion.check_bounds(h, x, y, tol).table

    table = map_rows(rows, grid, args.threads)
    lower_ok, upper_ok = table["lower_ok"], table["upper_ok"]
    K, r, avg = table["K"], table["rho"], table["avg_combined"]
    summary = distortion.BoundsReport(
        points_checked=int(K.size),
        lower_violations=int(np.count_nonzero(~lower_ok)),
        upper_violations=int(np.count_nonzero(~upper_ok)),
        empirical_max_ratio_lower=float(np.max(r / (4.0 * K))),
        empirical_max_ratio_upper=float(np.max(K / np.maximum(r, avg))),
    ).summary()
    summary["C0"] = distortion.C0
    summary["tolerance"] = tol
    if args.out:
        with open_out(args.out) as fh:
            fh.write(csv_text(distortion.BOUNDS_COLUMNS, table))
    sys.stdout.write(dumps(summary))
    if summary["lower_violations"] or summary["upper_violations"]:
        return EXIT_VIOLATION
    return EXIT_OK


def _box(args):
    if args.box is None:
        return integ.DEFAULT_BOX
    X, y_min, y_max = _floats(args.box, 3, "--box")
    try:
        return integ.Box.symmetric(X, y_min, y_max)
    except ValueError as exc:
        raise InputError(f"--box: {exc}") from None


def cmd_integrate(args):
    h = _need_map(args)
    tol = tolerance(args, None) if args.tol is None else args.tol
    try:
        phi = integ.PhiFamily.parse(args.phi, args.q)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    what = args.what
    if isinstance(h, CircleHomeo):
        what = what or "circle"
        if what == "circle":
            rep = integ.circle_integrability(h, phi, tol, threads=args.threads)
        elif what == "welding":
            rep = integ.welding_l1_test(h, tol)
        elif what == "criterion":
            rep = integ.distortion_criterion_check(h, 0.0, args.t_min)
        else:
            raise InputError(f"--what {what} needs a line map")
    else:
        what = what or "rho"
        box = _box(args)
        if what == "rho":
            rep = integ.rho_integral(h, phi, box, tol, args.threads)
        elif what == "dilatation":
            rep = integ.dilatation_integral(h, phi, box, tol, args.threads)
        elif what == "transfer":
            rep = integ.transfer_check(h, phi, box, tol, args.threads)
        else:
            raise InputError(f"--what {what} needs a circle map")
    out = {"phi": phi.label(), "q": phi.q, "what": what}
    out.update(rep.as_dict())
    _emit(args, dumps(out))
    if what == "transfer" and not rep.pointwise_ok:
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_bmo(args):
    A = bmo.parse_field(args.field)
    tol = args.tol if args.tol is not None else 1e-8
    lo, hi = _floats(args.x_range, 2, "--x-range")
    try:
        family = bmo.BallFamily(k_max=args.k_max, x_lo=lo, x_hi=hi,
                                max_centers=args.max_centers)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    est = bmo.bmo_seminorm(A, family, tol)
    out = est.as_dict()
    code = EXIT_OK
    if args.lemma:
        out["lemma"] = bmo.lemma_checks(A, bmo.BallFamily(k_max=min(args.k_max, 6), x_lo=lo,
                                                          x_hi=hi, max_centers=3),
                                        tol=tol).as_dict()
    if args.map:
        h = _need_line(load_map(args.map), "bmo --map")
        grid = _grid(args)
        X, Y = grid.mesh()
        rep = bmo.implication_check(h, A, X, Y, tol=tol)
        out["implication"] = rep.as_dict()
        if rep.rho_violations:
            code = EXIT_VIOLATION
    _emit(args, dumps(out))
    return code


def cmd_render(args):
    h = _need_map(args)
    kw = {"samples": args.samples, "stroke": args.stroke, "size": args.size}
    if isinstance(h, CircleHomeo):
        lines = (16, 8)
        if args.lines:
            a, b = _floats(args.lines, 2, "--lines")
            lines = (int(a), int(b))
        spec = RenderSpec(domain="disk", lines=lines, **kw)
    else:
        if args.grid:
            g = GridSpec.parse(args.grid)
            spec = RenderSpec(window=(g.x0, g.x1, g.y0, g.y1), lines=(g.nx, g.ny), **kw)
        else:
            spec = RenderSpec(**kw)
    try:
        svg = render(h, spec)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _emit(args, svg)
    return EXIT_OK


def cmd_oracle(args):
    if args.oracle_cmd == "goldens":
        values = oracle.golden_values()
        _emit(args, dumps(values))
        return EXIT_OK
    h = _need_line(_need_map(args), "oracle verify")
    if args.points < 1:
        raise InputError("--points must be positive")
    rng = np.random.default_rng(seed())
    if args.grid:
        g = GridSpec.parse(args.grid)
        x0, x1, y0, y1 = g.x0, g.x1, g.y0, g.y1
    else:
        x0, x1, y0, y1 = -5.0, 5.0, 1e-2, 5.0
    xs = rng.uniform(x0, x1, args.points)
    ys = np.exp(rng.uniform(math.log(y0), math.log(y1), args.points))
    rows = []
    fails = 0
    for x, y in zip(xs, ys):
        j = jet(h, x, y)
        jet_err = oracle.relative_jet_error(h, x, y)
        k_err = abs(oracle.norm_dilatation(j) - j.dilatation_K)
        fast = distortion.segment_average(h, x, y)
        right, left = oracle.brute_segment_averages(h, x, y)
        seg_err = max(abs(fast.avg_right - right), abs(fast.avg_left - left)) / max(
            1.0, fast.avg_combined)
        ok = jet_err < 1e-6 and k_err < 1e-9 and seg_err < 1e-8
        fails += not ok
        rows.append((x, y, jet_err, k_err, seg_err, ok))
    lines = [f"{'x':>12} {'y':>12} {'jet_rel':>10} {'K_diff':>10} {'seg_rel':>10}  result"]
    for x, y, a, b, c, ok in rows:
        lines.append(f"{x:12.6g} {y:12.6g} {a:10.3e} {b:10.3e} {c:10.3e}  "
                     f"{'pass' if ok else 'FAIL'}")
    lines.append(f"{len(rows) - fails}/{len(rows)} passed")
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if fails == 0 else EXIT_NUMERIC


# ---------------------------------------------------------------------------
# parser


def _global_options(p, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--map", metavar="FILE", default=d(None), help="JSON map file")
    p.add_argument("--tol", type=float, default=d(None),
                   help="tolerance (default 1e-10 for exact classes, 1e-8 otherwise)")
    p.add_argument("--grid", metavar="x0,x1,y0,y1,nx,ny", default=d(None),
                   help="evaluation grid, optional 7th field uniform|dyadic")
    p.add_argument("--out", metavar="PATH", default=d(None), help="output file (default stdout)")
    p.add_argument("--threads", type=int, default=d(1), help="worker threads for grids")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcx", description=(
        "Beurling-Ahlfors extensions, dilatation bounds, integrability and BMO checks."))
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, helptext):
        p = sub.add_parser(name, help=helptext)
        _global_options(p, suppress=True)
        return p

    p = add("jet", "jet of the extension at a point (JSON) or over a grid (CSV)")
    p.add_argument("--point", metavar="x,y")
    p.set_defaults(func=cmd_jet)

    p = add("extend", "extension values at a point or over a grid")
    p.add_argument("--point", metavar="x,y")
    p.set_defaults(func=cmd_extend)

    p = add("rho", "symmetric distortion and segment averages")
    p.add_argument("--point", metavar="x,t")
    p.set_defaults(func=cmd_rho)

    p = add("bounds", "check rho/4 <= K <= C0 max{rho, avg} over a grid")
    p.set_defaults(func=cmd_bounds)

    p = add("integrate", "truncated integrability report")
    p.add_argument("--phi", default="exp", help="exp | power:p | subexp | linear")
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--box", metavar="X,y_min,y_max")
    p.add_argument("--what", choices=("rho", "dilatation", "transfer", "circle", "welding",
                                      "criterion"))
    p.add_argument("--t-min", type=float, default=1e-10, dest="t_min")
    p.set_defaults(func=cmd_integrate)

    p = add("bmo", "BMO seminorm lower bound of a field")
    p.add_argument("--field", required=True,
                   help="const:c | log_inv_y | inv_y | sin_log_inv_y | csv:PATH")
    p.add_argument("--k-max", type=int, default=10, dest="k_max")
    p.add_argument("--x-range", default="-1,1", dest="x_range")
    p.add_argument("--max-centers", type=int, default=9, dest="max_centers")
    p.add_argument("--lemma", action="store_true", help="add the averaging-operator ratios")
    p.set_defaults(func=cmd_bmo)

    p = add("render", "SVG image of a coordinate grid under the extension")
    p.add_argument("--lines", metavar="rays,circles", help="disk renders only")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--stroke", type=float, default=1.0)
    p.add_argument("--size", type=int, default=800)
    p.set_defaults(func=cmd_render)

    p = add("oracle", "independent reference checks")
    osub = p.add_subparsers(dest="oracle_cmd", required=True)
    v = osub.add_parser("verify", help="compare fast paths with the oracle at random points")
    _global_options(v, suppress=True)
    v.add_argument("--points", type=int, default=20)
    g = osub.add_parser("goldens", help="print the reference golden values")
    _global_options(g, suppress=True)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    if args.threads < 1:
        print("qcx: --threads must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    if args.tol is not None and not args.tol > 0:
        print("qcx: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        with np.errstate(all="ignore"):
            return args.func(args)
    except (InputError, MapSpecError) as exc:
        print(f"qcx: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (QuadratureError, ConsistencyError, FloatingPointError) as exc:
        print(f"qcx: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"qcx: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"qcx: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
