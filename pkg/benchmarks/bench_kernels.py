#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure numpy backend.

Run after building the extension (pip install -e . --no-build-isolation):

    python benchmarks/bench_kernels.py

Workloads mirror production shapes: overlap counting over a BSDS-sized
mask stack, NMS over a full edge map, and the correspondence matching
that dominates a 99-threshold evaluation sweep.
"""

from __future__ import annotations

import time

import numpy as np

from scesame._kernels import _numpy as pure
from scesame.edges import sobel_gradients
from scesame.masks import rle_encode

try:
    from scesame._kernels import _ext as ext
except ImportError:
    ext = None


def timeit(fn, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def bench_overlaps(rng):
    h, w = 321, 481
    n = 96  # typical post-NMS mask count
    grids = []
    for _ in range(n):
        y0, x0 = rng.integers(0, h - 40), rng.integers(0, w - 40)
        sh, sw = rng.integers(20, min(160, h - y0)), rng.integers(20, min(200, w - x0))
        g = np.zeros((h, w), dtype=bool)
        g[y0:y0 + sh, x0:x0 + sw] = True
        grids.append(g)
    starts, ends, offsets = [], [], [0]
    for g in grids:
        s, e = rle_encode(g).foreground_runs()
        starts.append(s)
        ends.append(e)
        offsets.append(offsets[-1] + len(s))
    args = (np.concatenate(starts), np.concatenate(ends),
            np.asarray(offsets, dtype=np.int64), h * w)
    return {name: timeit(lambda b=backend: b.pairwise_intersections(*args))
            for name, backend in _backends()}


def bench_nms(rng):
    values = rng.random((321, 481))
    gx, gy = sobel_gradients(values)
    return {name: timeit(lambda b=backend: b.nms_suppress(values, gx, gy, 0.0))
            for name, backend in _backends()}


def bench_matching(rng):
    h, w = 321, 481
    pred = rng.random((h, w)) > 0.985
    gt = rng.random((h, w)) > 0.985
    pr, pc = (a.astype(np.int64) for a in np.nonzero(pred))
    gr, gc = (a.astype(np.int64) for a in np.nonzero(gt))
    max_dist = 0.0075 * float(np.hypot(h, w))
    return {name: timeit(lambda b=backend: b.match_pixels(pr, pc, gr, gc, max_dist))
            for name, backend in _backends()}


def _backends():
    backends = [("numpy", pure)]
    if ext is not None:
        backends.append(("ext", ext))
    return backends


def main():
    rng = np.random.default_rng(0)
    benches = [
        ("pairwise overlaps (96 masks, 321x481)", bench_overlaps),
        ("edge NMS (321x481)", bench_nms),
        ("pixel matching (~2.3k px/side)", bench_matching),
    ]
    if ext is None:
        print("compiled extension not built; timing the numpy backend only\n")
    print(f"{'workload':<42}{'numpy':>10}{'ext':>10}{'speedup':>9}")
    for label, bench in benches:
        results = bench(rng)
        t_pure = results["numpy"][0]
        line = f"{label:<42}{t_pure * 1e3:>8.1f}ms"
        if "ext" in results:
            t_ext, out_ext = results["ext"]
            out_pure = results["numpy"][1]
            if isinstance(out_pure, tuple):
                agree = all(np.array_equal(a, b) for a, b in zip(out_pure, out_ext))
            else:
                agree = np.array_equal(out_pure, out_ext)
            line += f"{t_ext * 1e3:>8.1f}ms{t_pure / t_ext:>8.1f}x"
            if not agree:
                line += "  MISMATCH"
        print(line)


if __name__ == "__main__":
    main()
