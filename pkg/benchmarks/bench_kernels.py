"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--json out.json]

Each kernel is timed on the same inputs for every importable backend, then a
whole Newton optimization (which spends nearly all of its time in the profile
projection and resistance kernels) is timed with each backend swapped in.
"""
from __future__ import annotations

import argparse
import json
import time
from contextlib import contextmanager

import numpy as np

from shapeopt import _kernels
from shapeopt.geometry import random_convex_polygon
from shapeopt.optimizer import newton_optimize

KERNELS = ("pava_nonincreasing", "project_concave_profile", "profile_resistance", "convex_polygon_distance")


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    n = 2000
    y = rng.normal(size=n).cumsum()
    w = rng.uniform(0.5, 2.0, n)
    r = np.linspace(0.0, 1.0, n + 1)
    u = 1.0 - r ** 2 + 0.01 * rng.normal(size=n + 1)
    poly = random_convex_polygon(rng, 64)
    pts = rng.uniform(-1.5, 1.5, (5000, 2))
    return {
        "pava_nonincreasing": lambda k: k.pava_nonincreasing(y, w),
        "project_concave_profile": lambda k: k.project_concave_profile(u, 1.0, 1.0 / n),
        "profile_resistance": lambda k: k.profile_resistance(u, 1.0 / n),
        "convex_polygon_distance": lambda k: k.convex_polygon_distance(pts, poly.vertices),
    }


@contextmanager
def use_backend(mod):
    saved = {name: getattr(_kernels, name) for name in KERNELS}
    try:
        for name in KERNELS:
            setattr(_kernels, name, getattr(mod, name))
        yield
    finally:
        for name, fn in saved.items():
            setattr(_kernels, name, fn)


def main(argv=None) -> dict:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--budget", type=int, default=20000, help="Newton evaluations")
    ap.add_argument("--json", help="also write the results here")
    args = ap.parse_args(argv)

    found = _kernels.backends()
    table = cases(np.random.default_rng(0))
    results: dict = {"backends": sorted(found), "kernels": {}, "newton": {}}
    for name, call in table.items():
        row = {b: best_of(lambda: call(mod), args.repeat) for b, mod in found.items()}
        results["kernels"][name] = row
    for b, mod in found.items():
        with use_backend(mod):
            t0 = time.perf_counter()
            res = newton_optimize(1.0, 1.0, 200, args.budget, seed=1)
            results["newton"][b] = {"seconds": time.perf_counter() - t0, "resistance": res.value}

    print(f"{'kernel':<26}" + "".join(f"{b:>12}" for b in sorted(found)) + ("     speedup" if len(found) > 1 else ""))
    for name, row in results["kernels"].items():
        line = f"{name:<26}" + "".join(f"{row[b] * 1e3:10.3f}ms" for b in sorted(found))
        if "cython" in row:
            line += f"{row['python'] / row['cython']:11.1f}x"
        print(line)
    row = results["newton"]
    line = f"{'newton run (budget ' + str(args.budget) + ')':<26}" + "".join(f"{row[b]['seconds']:11.2f}s" for b in sorted(found))
    if "cython" in row:
        line += f"{row['python']['seconds'] / row['cython']['seconds']:11.1f}x"
    print(line)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2, sort_keys=True)
    return results


if __name__ == "__main__":
    main()
