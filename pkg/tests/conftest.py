"""Shared fixtures and independent reference implementations.

The reference implementations here deliberately avoid the library code
paths they check: the RLE decoder walks pixels one by one, NMS is the
plain quadratic greedy loop, and the matcher enumerates all matchings.
"""

from __future__ import annotations

import numpy as np
import pytest

from scesame._kernels import _numpy as numpy_backend

try:
    from scesame._kernels import _ext as ext_backend
except ImportError:
    ext_backend = None

BACKENDS = [numpy_backend] + ([ext_backend] if ext_backend is not None else [])


@pytest.fixture(params=BACKENDS, ids=lambda b: b.BACKEND_NAME)
def kernel_backend(request):
    return request.param


def reference_rle_decode(height, width, counts):
    """Pixel-by-pixel column-major decoder."""
    grid = np.zeros((height, width), dtype=bool)
    pos = 0
    value = False
    for count in counts:
        for _ in range(count):
            row = pos % height
            col = pos // height
            grid[row, col] = value
            pos += 1
        value = not value
    return grid


def reference_greedy_nms(boxes, scores, areas, ids, threshold):
    """Quadratic greedy reference; returns kept ids in kept order."""

    def iou(a, b):
        ix = max(0, min(a[0] + a[2], b[0] + b[2]) - max(a[0], b[0]))
        iy = max(0, min(a[1] + a[3], b[1] + b[3]) - max(a[1], b[1]))
        inter = ix * iy
        return inter / (a[2] * a[3] + b[2] * b[3] - inter)

    order = sorted(range(len(boxes)), key=lambda i: (-scores[i], -areas[i], ids[i]))
    kept = []
    for i in order:
        if all(iou(boxes[i], boxes[j]) < threshold for j in kept):
            kept.append(i)
    return [ids[i] for i in kept]


def reference_max_matching(left_pts, right_pts, max_dist):
    """Exhaustive maximum-cardinality matching (small instances only)."""
    d2max = max_dist * max_dist
    adj = []
    for (lr, lc) in left_pts:
        adj.append([j for j, (rr, rc) in enumerate(right_pts)
                    if (lr - rr) ** 2 + (lc - rc) ** 2 <= d2max])

    best = 0

    def recurse(i, used, size):
        nonlocal best
        if i == len(adj):
            best = max(best, size)
            return
        # upper bound prune
        if size + (len(adj) - i) <= best:
            return
        recurse(i + 1, used, size)
        for j in adj[i]:
            if j not in used:
                used.add(j)
                recurse(i + 1, used, size + 1)
                used.remove(j)

    recurse(0, set(), 0)
    return best
