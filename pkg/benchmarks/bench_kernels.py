"""Compare the compiled and numpy kernel backends on random piecewise-linear maps.

    python benchmarks/bench_kernels.py [--points N] [--breaks M] [--repeat R]
"""

import argparse
import timeit

import numpy as np

from qcx import kernels


def random_tables(rng, n_breaks):
    t = np.sort(rng.uniform(-10, 10, n_breaks))
    slopes = np.exp(rng.uniform(-1.5, 1.5, n_breaks + 1))
    h = np.concatenate([[0.0], np.cumsum(slopes[1:-1] * np.diff(t))])
    return t, h, slopes


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=100_000)
    ap.add_argument("--breaks", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    bt, bh, s = random_tables(rng, args.breaks)
    x = rng.uniform(-12, 12, args.points)
    y = np.exp(rng.uniform(np.log(1e-3), np.log(10.0), args.points))

    impls = kernels.backends()
    cases = {
        "pl_eval": lambda m: m.pl_eval(bt, bh, s, x),
        "pl_increments": lambda m: m.pl_increments(bt, bh, s, x, y),
        "pl_rho": lambda m: m.pl_rho(bt, bh, s, x, y),
        "pl_segment_averages": lambda m: m.pl_segment_averages(bt, bh, s, x[:10_000],
                                                               y[:10_000]),
    }
    names = sorted(impls)
    print(f"{args.points} points, {args.breaks} breakpoints, best of {args.repeat}")
    print(f"{'kernel':<22}" + "".join(f"{n + ' [ms]':>16}" for n in names)
          + ("    speedup" if len(names) > 1 else ""))
    for label, fn in cases.items():
        best = {}
        for n in names:
            fn(impls[n])  # warm up
            best[n] = min(timeit.repeat(lambda: fn(impls[n]), number=1,
                                        repeat=args.repeat)) * 1e3
        row = f"{label:<22}" + "".join(f"{best[n]:>16.2f}" for n in names)
        if len(names) > 1:
            row += f"{best['python'] / best['cython']:>11.1f}x"
        print(row)
    if "cython" not in impls:
        print("compiled backend not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
