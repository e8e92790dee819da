# Compiled backend for the hot kernels. Mirrors _numpy.py: keep the
# arithmetic expression order identical, the parity tests require
# bit-identical outputs from the two backends.

import numpy as np

cimport numpy as cnp
from libc.math cimport floor, sqrt

cnp.import_array()

BACKEND_NAME = "ext"


def pairwise_intersections(starts, ends, offsets, total_pixels):
    """Pairwise foreground-intersection counts from column-major run lists."""
    cdef cnp.int64_t[::1] s = np.ascontiguousarray(starts, dtype=np.int64)
    cdef cnp.int64_t[::1] e = np.ascontiguousarray(ends, dtype=np.int64)
    cdef cnp.int64_t[::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef Py_ssize_t n = off.shape[0] - 1
    out = np.zeros((n, n), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] c = out
    cdef Py_ssize_t i, j
    cdef cnp.int64_t a, b, lo, hi, acc
    for i in range(n):
        for j in range(i, n):
            acc = 0
            a = off[i]
            b = off[j]
            while a < off[i + 1] and b < off[j + 1]:
                lo = s[a] if s[a] > s[b] else s[b]
                hi = e[a] if e[a] < e[b] else e[b]
                if hi > lo:
                    acc += hi - lo
                if e[a] < e[b]:
                    a += 1
                else:
                    b += 1
            c[i, j] = acc
            c[j, i] = acc
    return out


cdef inline double _sample_zero(const double[:, ::1] v, double y, double x,
                                Py_ssize_t h, Py_ssize_t w) nogil:
    cdef double y0f = floor(y)
    cdef double x0f = floor(x)
    cdef double fy = y - y0f
    cdef double fx = x - x0f
    cdef long y0 = <long> y0f
    cdef long x0 = <long> x0f
    cdef double out = 0.0
    cdef long yy, xx
    cdef double wy, wx
    # corner order (0,0), (0,1), (1,0), (1,1) matches the numpy backend
    yy = y0
    xx = x0
    if 0 <= yy < h and 0 <= xx < w:
        out = out + v[yy, xx] * (1.0 - fy) * (1.0 - fx)
    xx = x0 + 1
    if 0 <= yy < h and 0 <= xx < w:
        out = out + v[yy, xx] * (1.0 - fy) * fx
    yy = y0 + 1
    xx = x0
    if 0 <= yy < h and 0 <= xx < w:
        out = out + v[yy, xx] * fy * (1.0 - fx)
    xx = x0 + 1
    if 0 <= yy < h and 0 <= xx < w:
        out = out + v[yy, xx] * fy * fx
    return out


def nms_suppress(values, gx, gy, double low_mult):
    """Directional non-maximum suppression; see the numpy backend docstring."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] varr = np.ascontiguousarray(values, dtype=np.float64)
    cdef const double[:, ::1] v = varr
    cdef const double[:, ::1] gxv = np.ascontiguousarray(gx, dtype=np.float64)
    cdef const double[:, ::1] gyv = np.ascontiguousarray(gy, dtype=np.float64)
    cdef Py_ssize_t h = v.shape[0]
    cdef Py_ssize_t w = v.shape[1]
    out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, c
    cdef double mag, ux, uy, ahead, behind, val
    with nogil:
        for r in range(h):
            for c in range(w):
                val = v[r, c]
                mag = sqrt(gxv[r, c] * gxv[r, c] + gyv[r, c] * gyv[r, c])
                if mag > 0.0:
                    ux = gxv[r, c] / mag
                    uy = gyv[r, c] / mag
                    ahead = _sample_zero(v, r + uy, c + ux, h, w)
                    behind = _sample_zero(v, r - uy, c - ux, h, w)
                    if val >= ahead and val >= behind:
                        out[r, c] = val
                    else:
                        out[r, c] = val * low_mult
                else:
                    out[r, c] = val
    return out_arr


def match_pixels(pred_rows, pred_cols, gt_rows, gt_cols, double max_dist):
    """Maximum-cardinality pixel matching; see the numpy backend docstring."""
    cdef cnp.int64_t[::1] pr = np.ascontiguousarray(pred_rows, dtype=np.int64)
    cdef cnp.int64_t[::1] pc = np.ascontiguousarray(pred_cols, dtype=np.int64)
    cdef cnp.int64_t[::1] gr = np.ascontiguousarray(gt_rows, dtype=np.int64)
    cdef cnp.int64_t[::1] gc = np.ascontiguousarray(gt_cols, dtype=np.int64)
    cdef Py_ssize_t n_pred = pr.shape[0]
    cdef Py_ssize_t n_gt = gr.shape[0]
    pred_matched = np.zeros(n_pred, dtype=bool)
    gt_matched = np.zeros(n_gt, dtype=bool)
    if n_pred == 0 or n_gt == 0:
        return pred_matched, gt_matched

    cdef long reach = <long> floor(max_dist)
    cdef double d2max = max_dist * max_dist
    cdef Py_ssize_t i
    cdef long lo, hi, j, dr, dc

    # pass 1: count neighbors, pass 2: fill CSR (gt pixels are row-major)
    indptr_arr = np.zeros(n_pred + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] indptr = indptr_arr
    cdef cnp.int64_t[::1] row_lo = np.searchsorted(gt_rows, np.asarray(pred_rows) - reach, side="left").astype(np.int64)
    cdef cnp.int64_t[::1] row_hi = np.searchsorted(gt_rows, np.asarray(pred_rows) + reach, side="right").astype(np.int64)
    cdef cnp.int64_t cnt, total
    with nogil:
        for i in range(n_pred):
            cnt = 0
            for j in range(row_lo[i], row_hi[i]):
                dr = gr[j] - pr[i]
                dc = gc[j] - pc[i]
                if <double> (dr * dr + dc * dc) <= d2max:
                    cnt += 1
            indptr[i + 1] = indptr[i] + cnt
    total = indptr[n_pred]
    indices_arr = np.empty(total, dtype=np.int64)
    cdef cnp.int64_t[::1] indices = indices_arr
    cdef cnp.int64_t pos
    with nogil:
        for i in range(n_pred):
            pos = indptr[i]
            for j in range(row_lo[i], row_hi[i]):
                dr = gr[j] - pr[i]
                dc = gc[j] - pc[i]
                if <double> (dr * dr + dc * dc) <= d2max:
                    indices[pos] = j
                    pos += 1

    # Hopcroft-Karp, identical traversal order to the numpy backend
    cdef cnp.int64_t[::1] match_l = np.full(n_pred, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] match_r = np.full(n_gt, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] dist = np.zeros(n_pred, dtype=np.int64)
    cdef cnp.int64_t[::1] queue = np.empty(n_pred, dtype=np.int64)
    cdef cnp.int64_t[::1] ustack = np.empty(n_pred + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] vpath = np.empty(n_pred + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] ptr = np.empty(n_pred + 1, dtype=np.int64)
    cdef cnp.int64_t inf = n_pred + 1
    cdef cnp.int64_t qhead, qtail, shortest, u, w, v, e, s, top
    cdef bint augmented, moved
    with nogil:
        while True:
            qhead = 0
            qtail = 0
            for u in range(n_pred):
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
            for s in range(n_pred):
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
                    for e in range(top, -1, -1):
                        match_r[vpath[e]] = ustack[e]
                        match_l[ustack[e]] = vpath[e]

    for i in range(n_pred):
        if match_l[i] >= 0:
            pred_matched[i] = True
    for i in range(n_gt):
        if match_r[i] >= 0:
            gt_matched[i] = True
    return pred_matched, gt_matched
