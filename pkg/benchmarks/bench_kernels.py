#!/usr/bin/env python3
"""Benchmark the numba and numpy kernel backends against each other.

Times the surface-grid fill and the bulk classification/projection kernels
on identical inputs and prints a per-kernel comparison. Results must be
bit-identical between backends; this script asserts that too.

Usage:
    python3 benchmarks/bench_kernels.py [--grid 2048] [--corpus 2000000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from ridgeline import _kernels


def _best_of(repeat, fn, *args):
    best = float("inf")
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--grid", type=int, default=2048, help="grid edge length")
    parser.add_argument("--corpus", type=int, default=2_000_000, help="bulk corpus size")
    parser.add_argument("--repeat", type=int, default=5, help="timed repetitions, best kept")
    args = parser.parse_args()

    rng = np.random.default_rng(42)

    def logu(size):
        return 10.0 ** rng.uniform(-2, 10, size)

    i_a_axis, i_n_axis = logu(args.grid), logu(args.grid)
    n = args.corpus
    peak, mem_bw, net_bw = logu(n), logu(n), logu(n)
    flops, mem_bytes, net_bytes = logu(n), logu(n), logu(n)
    workloads = {
        "attainable_grid": (4.2e12, 105e9, 12e9, i_a_axis, i_n_axis),
        "attainable_many": (peak, mem_bw, net_bw, flops / mem_bytes, flops / net_bytes),
        "classify_geometric_codes": (
            mem_bytes / net_bytes,
            flops / mem_bytes,
            mem_bw / net_bw,
            peak / mem_bw,
            peak / net_bw,
        ),
        "classify_time_codes": (flops / peak, mem_bytes / mem_bw, net_bytes / net_bw),
    }

    implementations = _kernels.available_implementations()
    print(f"backends: {', '.join(implementations)} (active: {_kernels.BACKEND})")
    print(f"grid {args.grid}x{args.grid}, corpus {n}, best of {args.repeat}\n")
    print(f"{'kernel':<26} {'numpy':>12} {'numba':>12} {'speedup':>9}")

    for name, payload in workloads.items():
        times, outputs = {}, {}
        for backend, impl in implementations.items():
            impl[name](*(a[:2] if isinstance(a, np.ndarray) else a for a in payload))  # warm
            times[backend], outputs[backend] = _best_of(args.repeat, impl[name], *payload)
        if len(outputs) == 2:
            assert np.array_equal(outputs["numpy"], outputs["numba"]), name
        numpy_ms = times["numpy"] * 1e3
        if "numba" in times:
            numba_ms = times["numba"] * 1e3
            print(f"{name:<26} {numpy_ms:>10.2f}ms {numba_ms:>10.2f}ms {times['numpy'] / times['numba']:>8.2f}x")
        else:
            print(f"{name:<26} {numpy_ms:>10.2f}ms {'-':>12} {'-':>9}")


if __name__ == "__main__":
    main()
