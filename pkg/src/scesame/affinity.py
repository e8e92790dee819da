"""Pairwise mask affinities for spectral clustering.

The mask affinity combines two factors:

    w_ij = exp(r_ij / tau) * exp(-||x_i - x_j||^2 / (sigma_i * sigma_j))

where r_ij is the overlap area divided by the smaller mask's area,
x_i is the bounding-box center, and sigma_i is a per-mask local scale
(distance to a fixed-rank neighbor, the self-tuning construction).
With all overlaps zero this reduces exactly to the plain local-scaling
affinity. tau < 1 weights overlap above proximity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import EmptyMaskError, InvalidAffinityError, ParameterError, TooFewMasksError
from .masks import MaskRecord, MaskSet


@dataclass(frozen=True)
class AffinityParams:
    tau: float = 0.5
    local_scale_neighbor: int = 7
    epsilon: float = 1e-12

    def __post_init__(self):
        if self.tau <= 0:
            raise ParameterError(f"tau must be positive, got {self.tau}")
        if self.local_scale_neighbor < 1:
            raise ParameterError("local_scale_neighbor must be >= 1")
        if self.epsilon <= 0:
            raise ParameterError("epsilon must be positive")


@dataclass(frozen=True)
class AffinityMatrix:
    """Symmetric nonnegative affinities with zero diagonal."""

    n: int
    w: np.ndarray

    def __post_init__(self):
        w = self.w
        if w.shape != (self.n, self.n):
            raise InvalidAffinityError(f"affinity shape {w.shape} != ({self.n}, {self.n})")
        if not np.array_equal(w, w.T):
            raise InvalidAffinityError("affinity matrix is not symmetric")
        if np.any(w < 0):
            raise InvalidAffinityError("affinity matrix has negative entries")
        if np.any(np.diag(w) != 0):
            raise InvalidAffinityError("affinity diagonal must be zero")


def overlap_ratio(a: MaskRecord, b: MaskRecord) -> float:
    """|A intersect B| / min(|A|, |B|)."""
    if a.area == 0 or b.area == 0:
        raise EmptyMaskError("overlap ratio needs nonempty masks")
    inter = int(np.count_nonzero(a.decode() & b.decode()))
    return inter / min(a.area, b.area)


def pairwise_overlap_ratios(masks: MaskSet) -> np.ndarray:
    """Overlap-ratio matrix for all mask pairs (unit diagonal).

    Uses the run-intersection kernel, so overlaps are exact pixel counts.
    """
    n = len(masks)
    starts_parts = []
    ends_parts = []
    offsets = np.zeros(n + 1, dtype=np.int64)
    for i, m in enumerate(masks.masks):
        if m.area == 0:
            raise EmptyMaskError(f"mask {m.id} is empty")
        s, e = m.segmentation.foreground_runs()
        starts_parts.append(s)
        ends_parts.append(e)
        offsets[i + 1] = offsets[i] + len(s)
    starts = np.concatenate(starts_parts) if starts_parts else np.zeros(0, dtype=np.int64)
    ends = np.concatenate(ends_parts) if ends_parts else np.zeros(0, dtype=np.int64)
    inter = _kernels.pairwise_intersections(
        starts, ends, offsets, masks.image_height * masks.image_width)
    areas = inter.diagonal().astype(np.float64)
    return inter / np.minimum.outer(areas, areas)


def local_scales(centers: np.ndarray, params: AffinityParams) -> np.ndarray:
    """Per-point scale sigma_i: distance to the k-th closest other point.

    With fewer than k other points the farthest one is used instead, and
    degenerate (coincident) scales are floored at params.epsilon.
    """
    centers = np.asarray(centers, dtype=np.float64)
    n = len(centers)
    if n == 0:
        raise ParameterError("no points")
    if n == 1:
        return np.array([params.epsilon])
    diff = centers[:, None, :] - centers[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    # drop the self distance, then rank the rest ascending
    others = np.sort(dist + np.where(np.eye(n, dtype=bool), np.inf, 0.0), axis=1)[:, :-1]
    rank = min(params.local_scale_neighbor, n - 1) - 1
    sigma = others[:, rank]
    return np.maximum(sigma, params.epsilon)


def affinity_from_parts(ratios: np.ndarray, centers: np.ndarray, scales: np.ndarray,
                        tau: float) -> AffinityMatrix:
    """Combine overlap ratios, center distances and local scales."""
    centers = np.asarray(centers, dtype=np.float64)
    n = len(centers)
    diff = centers[:, None, :] - centers[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    w = np.exp(ratios / tau) * np.exp(-d2 / np.outer(scales, scales))
    np.fill_diagonal(w, 0.0)
    return AffinityMatrix(n=n, w=w)


def scesame_affinity(masks: MaskSet, params: AffinityParams = AffinityParams()) -> AffinityMatrix:
    """The full mask affinity matrix."""
    n = len(masks)
    if n < 2:
        raise TooFewMasksError(f"affinity needs >= 2 masks, got {n}")
    centers = np.array([m.center for m in masks.masks], dtype=np.float64)
    ratios = pairwise_overlap_ratios(masks)
    scales = local_scales(centers, params)
    return affinity_from_parts(ratios, centers, scales, params.tau)


def knn_affinity(points: np.ndarray, k_neighbors: int) -> AffinityMatrix:
    """Binary k-nearest-neighbor adjacency, symmetrized by union."""
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if k_neighbors < 1:
        raise ParameterError("k_neighbors must be >= 1")
    if n <= k_neighbors:
        raise ParameterError(f"need more than {k_neighbors} points, got {n}")
    diff = points[:, None, :] - points[None, :, :]
    dist = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(dist, np.inf)
    neighbors = np.argsort(dist, axis=1, kind="stable")[:, :k_neighbors]
    w = np.zeros((n, n))
    rows = np.repeat(np.arange(n), k_neighbors)
    w[rows, neighbors.ravel()] = 1.0
    w = np.maximum(w, w.T)
    return AffinityMatrix(n=n, w=w)
