#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Run:  python bench/benchmark_backends.py [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from group_explain import _kernels_py
from group_explain.coalitions import _size_weights
from group_explain.reference import random_partition
from group_explain.values import banzhaf_wtable, shapley_wtable

try:
    from group_explain import _kernels as compiled
except ImportError:
    compiled = None


def timeit(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads():
    rng = np.random.default_rng(0)
    n = 14
    table = rng.uniform(-1, 1, 1 << n)
    wt = shapley_wtable(n)
    yield f"shapley dense n={n}", lambda k: k.lin_value_dense(table, wt, n)

    n2 = 8
    table2 = rng.uniform(-1, 1, 1 << n2)
    table2[0] = 0.0
    partition = random_partition(n2, 4, rng)
    ow = _size_weights("shapley", partition.m)
    iw = [_size_weights("shapley", b.bit_count()) for b in partition.blocks]

    def owen_many(k):
        for _ in range(200):
            k.coalitional_direct_dense(table2, n2, partition.blocks, ow, iw)

    yield f"owen direct n={n2} x200", owen_many

    h1 = shapley_wtable(partition.m)
    h2 = [banzhaf_wtable(b.bit_count()) for b in partition.blocks]

    def twostep_many(k):
        for _ in range(200):
            k.two_step_dense(table2, n2, partition.blocks, h1, h2, 0)

    yield f"two-step n={n2} x200", twostep_many

    npts = 10000
    ell = 16
    rows = rng.integers(0, ell, npts)
    inner = np.sort(rng.choice(np.arange(1, npts), size=200, replace=False))
    bounds = np.concatenate([[0], inner, [npts]]).astype(np.int64)

    def mic_many(k):
        for _ in range(50):
            k.mic_optimize_free_axis(rows, bounds, ell, 15)

    yield f"mic DP n={npts} cand=200 x50", mic_many


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    print(f"{'workload':<32} {'python':>10} {'compiled':>10} {'speedup':>9}")
    for name, fn in workloads():
        t_py = timeit(lambda: fn(_kernels_py), args.repeats)
        if compiled is None:
            print(f"{name:<32} {t_py:>9.4f}s {'n/a':>10} {'n/a':>9}")
            continue
        t_c = timeit(lambda: fn(compiled), args.repeats)
        print(f"{name:<32} {t_py:>9.4f}s {t_c:>9.4f}s {t_py / t_c:>8.1f}x")


if __name__ == "__main__":
    main()
