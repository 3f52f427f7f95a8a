"""Benchmark the jitted kernels against their pure-numpy twins.

Usage: python benchmarks/bench_kernels.py [--n 20000] [--repeat 3]

Covers the three hot paths: capped ball query over a grid, CSR matmul
power accumulation, and farthest point sampling. The numba path is
warmed once before timing so compilation is not measured.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from cloudgraph import PointCloud, SmoothingConfig, build_adjacency, make_fixture
from cloudgraph import _kernels
from cloudgraph.smooth import smooth, symmetric_normalize, symmetric_refine


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(n: int, repeat: int) -> None:
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, size=(n, 3))
    grid = _kernels.Grid(pts)
    r, k = 2.2 * n ** (-1 / 3), 32  # roughly 40-point balls

    cloud = make_fixture("two-planes-cross", min(n, 4096), seed=0).cloud
    cfg = SmoothingConfig(radius=0.15, k=32, t_order=3)
    normalized = symmetric_normalize(symmetric_refine(build_adjacency(cloud, cfg)))

    cases = {
        "ball_query_all": lambda: _kernels.ball_query_all(grid, r, k),
        "smooth_power_sum": lambda: smooth(normalized, cfg),
        "fps": lambda: _kernels.fps(pts, min(n, 4096), 0),
    }

    print(f"n = {n} points, best of {repeat}")
    print(f"{'kernel':<20} {'numba (s)':>12} {'numpy (s)':>12} {'speedup':>9}")
    for name, fn in cases.items():
        times = {}
        for backend in ("numba", "numpy"):
            try:
                _kernels.set_backend(backend)
            except ImportError:
                times[backend] = float("nan")
                continue
            if backend == "numba":
                fn()  # warm the jit
            times[backend] = timeit(fn, repeat)
        speedup = times["numpy"] / times["numba"]
        print(
            f"{name:<20} {times['numba']:>12.4f} {times['numpy']:>12.4f} "
            f"{speedup:>8.1f}x"
        )


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    bench(args.n, args.repeat)
