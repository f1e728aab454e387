"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_backends.py [--repeat 3] [--quick]

Numba timings exclude the first (compiling or cache-loading) call, which is
reported separately.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from kpaac import _accel, histogram, mmc, paac


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(quick: bool):
    rng = np.random.default_rng(0)
    n = 32768 if quick else 262144
    x = mmc.SymbolChain(rng.integers(0, 256, n), 256)
    blob = paac.encode_fast(x, 1, backend="numpy" if not _accel.HAVE_NUMBA else "numba")
    grid = histogram.HistogramGrid(-5.0, 5.0, 200, histogram.sample_laplace(1.0, 2000, seed=0))
    theta = mmc.random_theta(2, 5, seed=0)
    return {
        f"encode n={n} m=256 k=1": lambda b: paac.encode_fast(x, 1, backend=b),
        f"decode n={n} m=256 k=1": lambda b: paac.decode_fast(blob, backend=b),
        "histogram DP R=200 n=2000": lambda b: histogram.dp_select(grid, backend=b),
        "sample order-5 MMC n=25000": lambda b: mmc.sample_mmc(theta, 25000, seed=1, backend=b),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller coder inputs")
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        print("numba not importable; only the numpy column is meaningful")
    print(f"{'kernel':32s} {'first numba':>12s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for name, fn in cases(args.quick).items():
        t0 = time.perf_counter()
        fn("numba" if _accel.HAVE_NUMBA else "numpy")
        first = time.perf_counter() - t0
        fast = best_of(lambda: fn("numba" if _accel.HAVE_NUMBA else "numpy"), args.repeat)
        slow = best_of(lambda: fn("numpy"), args.repeat)
        print(f"{name:32s} {first:11.3f}s {fast:9.4f}s {slow:9.4f}s {slow / fast:7.1f}x")


if __name__ == "__main__":
    main()
