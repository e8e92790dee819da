"""Pure numpy/Python backend for the hot kernels.

Always importable; the compiled extension in ``_ext.pyx`` implements the
same three entry points with identical numerics. Keep the arithmetic
expression order in sync between the two backends: the test suite
asserts bit-identical outputs, not just closeness.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"

# popcount of every byte value, for pairwise mask intersection counts
_POPCOUNT = np.unpackbits(np.arange(256, dtype=np.uint8)[:, None], axis=1).sum(axis=1).astype(np.int64)


def pairwise_intersections(starts, ends, offsets, total_pixels):
    """Pairwise foreground-intersection pixel counts from run lists.

    Masks are given as half-open runs [starts[j], ends[j]) of flat
    (column-major) pixel indices; offsets is the CSR index of runs per
    mask. Returns an (n, n) int64 matrix whose diagonal holds the areas.
    """
    starts = np.asarray(starts, dtype=np.int64)
    ends = np.asarray(ends, dtype=np.int64)
    offsets = np.asarray(offsets, dtype=np.int64)
    n = len(offsets) - 1
    counts = np.zeros((n, n), dtype=np.int64)
    if n == 0:
        return counts
    nbytes = (int(total_pixels) + 7) // 8
    packed = np.zeros((n, nbytes), dtype=np.uint8)
    flat = np.zeros(int(total_pixels), dtype=bool)
    for i in range(n):
        flat[:] = False
        for j in range(offsets[i], offsets[i + 1]):
            flat[starts[j]:ends[j]] = True
        packed[i] = np.packbits(flat)
    for i in range(n):
        inter = packed[i] & packed[i:]
        row = _POPCOUNT[inter].sum(axis=1)
        counts[i, i:] = row
        counts[i:, i] = row
    return counts


def _bilinear_zero(values, ys, xs):
    """Bilinear sample of ``values`` at real coordinates; outside -> 0."""
    h, w = values.shape
    y0 = np.floor(ys)
    x0 = np.floor(xs)
    fy = ys - y0
    fx = xs - x0
    y0 = y0.astype(np.int64)
    x0 = x0.astype(np.int64)
    out = np.zeros_like(ys)
    for dy, wy in ((0, 1.0 - fy), (1, fy)):
        for dx, wx in ((0, 1.0 - fx), (1, fx)):
            yy = y0 + dy
            xx = x0 + dx
            inside = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
            v = values[np.clip(yy, 0, h - 1), np.clip(xx, 0, w - 1)]
            out = out + v * wy * wx * inside
    return out


def nms_suppress(values, gx, gy, low_mult):
    """Directional non-maximum suppression.

    Each pixel is compared with the two bilinearly interpolated samples
    one unit along +/- its gradient direction; non-maximal pixels are
    scaled by ``low_mult``. Zero-gradient pixels are kept as is.
    """
    values = np.asarray(values, dtype=np.float64)
    h, w = values.shape
    mag = np.sqrt(gx * gx + gy * gy)
    nz = mag > 0.0
    ux = np.zeros_like(values)
    uy = np.zeros_like(values)
    np.divide(gx, mag, out=ux, where=nz)
    np.divide(gy, mag, out=uy, where=nz)
    rows = np.arange(h, dtype=np.float64)[:, None] + np.zeros((1, w))
    cols = np.arange(w, dtype=np.float64)[None, :] + np.zeros((h, 1))
    ahead = _bilinear_zero(values, rows + uy, cols + ux)
    behind = _bilinear_zero(values, rows - uy, cols - ux)
    keep = ~nz | ((values >= ahead) & (values >= behind))
    return np.where(keep, values, values * low_mult)


def _proximity_csr(pred_rows, pred_cols, gt_rows, gt_cols, max_dist):
    """CSR adjacency: pred pixel i -> ascending gt indices within max_dist.

    gt pixels must be sorted row-major (as produced by np.nonzero).
    """
    n_pred = len(pred_rows)
    n_gt = len(gt_rows)
    reach = int(np.floor(max_dist))
    d2max = float(max_dist) * float(max_dist)
    indptr = np.zeros(n_pred + 1, dtype=np.int64)
    chunks = []
    for i in range(n_pred):
        pr = pred_rows[i]
        pc = pred_cols[i]
        lo = np.searchsorted(gt_rows, pr - reach, side="left")
        hi = np.searchsorted(gt_rows, pr + reach, side="right")
        if lo < hi:
            dr = gt_rows[lo:hi].astype(np.int64) - pr
            dc = gt_cols[lo:hi].astype(np.int64) - pc
            near = np.flatnonzero(dr * dr + dc * dc <= d2max) + lo
            chunks.append(near)
            indptr[i + 1] = indptr[i] + len(near)
        else:
            indptr[i + 1] = indptr[i]
    if chunks:
        indices = np.concatenate(chunks).astype(np.int64)
    else:
        indices = np.zeros(0, dtype=np.int64)
    return indptr, indices, n_gt


def _hopcroft_karp(indptr, indices, n_left, n_right):
    """Maximum-cardinality bipartite matching, deterministic traversal order."""
    match_l = np.full(n_left, -1, dtype=np.int64)
    match_r = np.full(n_right, -1, dtype=np.int64)
    dist = np.zeros(n_left, dtype=np.int64)
    inf = n_left + 1
    queue = np.empty(n_left, dtype=np.int64)
    ustack = np.empty(n_left + 1, dtype=np.int64)
    vpath = np.empty(n_left + 1, dtype=np.int64)
    ptr = np.empty(n_left + 1, dtype=np.int64)
    while True:
        qhead = qtail = 0
        for u in range(n_left):
            if match_l[u] < 0:
                dist[u] = 0
                queue[qtail] = u
                qtail += 1
            else:
                dist[u] = inf
        shortest = inf
        while qhead < qtail:
            u = queue[qhead]
            qhead += 1
            if dist[u] >= shortest:
                continue
            for e in range(indptr[u], indptr[u + 1]):
                w = match_r[indices[e]]
                if w < 0:
                    if shortest == inf:
                        shortest = dist[u] + 1
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    queue[qtail] = w
                    qtail += 1
        if shortest == inf:
            break
        for s in range(n_left):
            if match_l[s] >= 0:
                continue
            top = 0
            ustack[0] = s
            ptr[0] = indptr[s]
            augmented = False
            while top >= 0:
                u = ustack[top]
                moved = False
                while ptr[top] < indptr[u + 1]:
                    v = indices[ptr[top]]
                    ptr[top] += 1
                    w = match_r[v]
                    if w < 0:
                        vpath[top] = v
                        augmented = True
                        moved = True
                        break
                    if dist[w] == dist[u] + 1:
                        vpath[top] = v
                        top += 1
                        ustack[top] = w
                        ptr[top] = indptr[w]
                        moved = True
                        break
                if augmented:
                    break
                if not moved:
                    dist[u] = inf
                    top -= 1
            if augmented:
                for i in range(top, -1, -1):
                    match_r[vpath[i]] = ustack[i]
                    match_l[ustack[i]] = vpath[i]
    return match_l, match_r


def match_pixels(pred_rows, pred_cols, gt_rows, gt_cols, max_dist):
    """Match predicted edge pixels to ground-truth pixels within max_dist.

    Both pixel lists must be in row-major scan order. Returns boolean
    matched flags (per pred pixel, per gt pixel); the matching has
    maximum cardinality under the Euclidean <= max_dist edge rule.
    """
    pred_rows = np.asarray(pred_rows, dtype=np.int64)
    pred_cols = np.asarray(pred_cols, dtype=np.int64)
    gt_rows = np.asarray(gt_rows, dtype=np.int64)
    gt_cols = np.asarray(gt_cols, dtype=np.int64)
    if len(pred_rows) == 0 or len(gt_rows) == 0:
        return (
            np.zeros(len(pred_rows), dtype=bool),
            np.zeros(len(gt_rows), dtype=bool),
        )
    indptr, indices, n_gt = _proximity_csr(pred_rows, pred_cols, gt_rows, gt_cols, max_dist)
    match_l, match_r = _hopcroft_karp(indptr, indices, len(pred_rows), n_gt)
    return match_l >= 0, match_r >= 0
