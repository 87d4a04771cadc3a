#!/usr/bin/env python3
"""Benchmark the hot kernels: compiled backend vs the pure-numpy fallback.

Run from the repository root::

    python3 benchmarks/bench_kernels.py [--repeats 7] [--sizes 10000,100000,1000000]

Each kernel is timed on identical inputs through both code paths. The
compiled path is warmed first so JIT compilation never lands in a timing.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from brickline import kernels


def _time(fn, *args, repeats: int) -> float:
    """Best-of-N wall time in seconds (best-of is robust to scheduler noise)."""
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _gap_mask(rng: np.random.Generator, n: int, missing: float = 0.05) -> np.ndarray:
    mask = rng.random(n) > missing
    mask[0] = mask[-1] = True
    return mask


def bench_case(n: int, repeats: int, rng: np.random.Generator) -> list[tuple[str, float, float]]:
    x = rng.standard_normal(n)
    batch = rng.standard_normal((64, max(n // 64, 25), 3))  # training-shaped input
    kernel = 25

    ts = np.sort(rng.integers(0, n * 600, size=n))
    start = int(ts[0] // 600) * 600
    n_buckets = (int(ts[-1]) - start) // 600 + 1

    mask = _gap_mask(rng, n)
    values = np.where(mask, x, 0.0)

    rows = []
    if kernels.HAVE_NUMBA:
        rows.append(("moving_average",
                     _time(kernels.moving_average_numba, batch, kernel, repeats=repeats),
                     _time(kernels.moving_average_numpy, batch, kernel, repeats=repeats)))
        rows.append(("bucket_sums",
                     _time(kernels.bucket_sums_numba, ts, x, start, 600, n_buckets,
                           repeats=repeats),
                     _time(kernels.bucket_sums_numpy, ts, x, start, 600, n_buckets,
                           repeats=repeats)))
        rows.append(("fill_gaps_quadratic",
                     _time(kernels.fill_gaps_quadratic_numba, values, mask,
                           repeats=repeats),
                     _time(kernels.fill_gaps_quadratic_numpy, values, mask,
                           repeats=repeats)))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=7)
    parser.add_argument("--sizes", default="10000,100000,1000000",
                        help="comma-separated input lengths")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    sizes = [int(s) for s in args.sizes.split(",") if s]
    rng = np.random.Generator(np.random.PCG64(args.seed))

    print(f"active backend: {kernels.ACTIVE_BACKEND}")
    if not kernels.HAVE_NUMBA:
        print("compiled backend unavailable; nothing to compare "
              "(install numba or unset BRICKLINE_NUMBA=0)")
        return
    kernels.warm_up()

    header = f"{'kernel':<22}{'n':>10}{'compiled':>12}{'numpy':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        for name, fast, slow in bench_case(n, args.repeats, rng):
            print(f"{name:<22}{n:>10}{fast * 1e3:>10.3f}ms{slow * 1e3:>10.3f}ms"
                  f"{slow / fast:>8.1f}x")


if __name__ == "__main__":
    main()
