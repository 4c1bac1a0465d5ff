"""Compare the compiled and numpy kernels on the map-coefficient sums.

Run ``python3 benchmarks/bench_kernels.py [--n-bath N] [--times M] [--repeat R]``.
Both backends are evaluated on identical inputs; the script also reports the
largest difference between them.
"""
import argparse
import time

import numpy as np

from centralspin import kernels
from centralspin.core_map import coefficient_series
from centralspin.params import ModelParams


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-bath", type=int, default=1000)
    ap.add_argument("--times", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    params = ModelParams(1.0, 1.0, 0.5, args.n_bath, 1.0)
    t = np.linspace(0.0, 50.0, args.times)
    terms = (args.n_bath + 1) * args.times
    results = {}
    for backend in ("cython", "python"):
        if backend == "cython" and kernels.BACKEND != "cython":
            print("cython: extension not built, skipped")
            continue
        for deriv in (False, True):
            sec, s = best_of(lambda: coefficient_series(params, t, derivatives=deriv, backend=backend), args.repeat)
            results[backend, deriv] = s
            print(f"{backend:7s} derivatives={deriv!s:5s} {sec:8.4f} s  {1e9 * sec / terms:7.1f} ns/term")
    if ("cython", True) in results:
        a, b = results["cython", True], results["python", True]
        diff = max(np.max(np.abs(getattr(a, k) - getattr(b, k)))
                   for k in ("alpha", "beta", "delta", "d_alpha", "d_beta", "d_delta"))
        print(f"max |cython - python| = {diff:.3e}")


if __name__ == "__main__":
    main()
