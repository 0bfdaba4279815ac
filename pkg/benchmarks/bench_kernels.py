#!/usr/bin/env python3
"""Benchmark the compiled signature kernel against the NumPy fallback.

The per-node Hermitian pair reduction dominates the runtime of every
signature integral, so this is the number that matters when deciding
whether the compiled extension is worth building on a platform.

Usage: python benchmarks/bench_kernels.py [--nodes N] [--repeats R]
"""

import argparse
import time

import numpy as np

from morselab import kernels
from morselab.kernels import _reduce_pairs_numpy


def synth_pairs(rng, count, n):
    a = rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))
    omega = a @ a.conj().transpose(0, 2, 1) + 3.0 * np.eye(n)
    b = rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))
    u = 0.5 * (b + b.conj().transpose(0, 2, 1))
    return omega, u


def timeit(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--nodes", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    have_compiled = kernels.backend_name() == "compiled"
    if not have_compiled:
        print("compiled backend unavailable; timing the fallback only")

    print(f"{'n':>3} {'nodes':>9} {'numpy (ms)':>12} {'compiled (ms)':>14} "
          f"{'speedup':>8}")
    for n in (1, 2, 3):
        omega, u = synth_pairs(rng, args.nodes, n)
        t_numpy = timeit(lambda: _reduce_pairs_numpy(omega, u, 1e-8),
                         args.repeats)
        if have_compiled:
            t_fast = timeit(
                lambda: kernels._speedups.reduce_pairs(omega, u, 1e-8),
                args.repeats)
            eq = np.allclose(
                kernels._speedups.reduce_pairs(omega, u, 1e-8)[0],
                _reduce_pairs_numpy(omega, u, 1e-8)[0], atol=1e-10)
            ratio = t_numpy / t_fast
            print(f"{n:>3} {args.nodes:>9} {1e3 * t_numpy:>12.2f} "
                  f"{1e3 * t_fast:>14.2f} {ratio:>7.2f}x  "
                  f"{'(results agree)' if eq else '(MISMATCH!)'}")
        else:
            print(f"{n:>3} {args.nodes:>9} {1e3 * t_numpy:>12.2f} "
                  f"{'-':>14} {'-':>8}")


if __name__ == "__main__":
    main()
