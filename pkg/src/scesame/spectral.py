"""Graph Laplacians, spectral embeddings and deterministic k-means.

The clustering routine is the textbook one: build a Laplacian from the
affinity matrix, take the eigenvectors of the k smallest eigenvalues,
and run k-means on the rows of the eigenvector matrix. Rows are used
as-is (no row normalization) by default; pass normalize_rows=True for
the unit-row variant.

Everything here is deterministic for a fixed seed: k-means uses seeded
k-means++ starts, a fixed restart count and iteration cap, and picks
the lowest-inertia restart (ties to the earliest restart).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .affinity import AffinityMatrix
from .errors import InvalidAffinityError, NumericError, ParameterError

DEGREE_FLOOR = 1e-12

UNNORMALIZED = "unnormalized"
NORMALIZED = "normalized"
VARIANTS = (UNNORMALIZED, NORMALIZED)


@dataclass(frozen=True)
class GraphLaplacian:
    variant: str
    matrix: np.ndarray
    degrees: np.ndarray


@dataclass(frozen=True)
class SpectralEmbedding:
    """Columns of ``vectors`` are the eigenvectors of the k smallest
    eigenvalues; row i is the embedding of vertex i."""

    k: int
    eigenvalues: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray
    clusters: tuple[tuple[int, ...], ...]

    @classmethod
    def from_labels(cls, labels: np.ndarray, k: int) -> "ClusterAssignment":
        groups = tuple(tuple(np.flatnonzero(labels == c).tolist()) for c in range(k))
        return cls(labels=labels, clusters=groups)


def build_laplacian(affinity: AffinityMatrix, variant: str = NORMALIZED,
                    degree_floor: float = DEGREE_FLOOR) -> GraphLaplacian:
    """L = D - W, or its symmetric normalization I - D^(-1/2) W D^(-1/2).

    Degrees are floored at ``degree_floor`` before inversion; an all-zero
    row therefore maps to an identity row in the normalized variant.
    """
    if variant not in VARIANTS:
        raise ParameterError(f"unknown Laplacian variant {variant!r}")
    w = np.asarray(affinity.w, dtype=np.float64)
    if not np.array_equal(w, w.T):
        raise InvalidAffinityError("affinity matrix is not symmetric")
    if np.any(w < 0):
        raise InvalidAffinityError("affinity matrix has negative entries")
    degrees = w.sum(axis=1)
    if variant == UNNORMALIZED:
        lap = np.diag(degrees) - w
    else:
        inv_sqrt = 1.0 / np.sqrt(np.maximum(degrees, degree_floor))
        lap = np.eye(len(w)) - (inv_sqrt[:, None] * w) * inv_sqrt[None, :]
        lap = (lap + lap.T) / 2.0
    return GraphLaplacian(variant=variant, matrix=lap, degrees=degrees)


def spectral_embedding(lap: GraphLaplacian, k: int) -> SpectralEmbedding:
    """Eigenvectors of the k smallest eigenvalues (dense symmetric solve)."""
    n = len(lap.matrix)
    if not 1 <= k <= n:
        raise ParameterError(f"k={k} out of range for n={n}")
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(lap.matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition failed on {n}x{n} Laplacian: {exc}") from exc
    return SpectralEmbedding(k=k, eigenvalues=eigenvalues[:k], vectors=eigenvectors[:, :k])


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centers[j] = points[idx]
        d2 = np.minimum(d2, ((points - centers[j]) ** 2).sum(axis=1))
    return centers


def _lloyd(points: np.ndarray, centers: np.ndarray, max_iter: int,
           tol: float) -> tuple[np.ndarray, float]:
    n, k = len(points), len(centers)
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        diff = points[:, None, :] - centers[None, :, :]
        d2 = np.einsum("nkd,nkd->nk", diff, diff)
        labels = d2.argmin(axis=1)
        # repair empty clusters: give each the point farthest from its
        # centroid, never draining another cluster below one member
        sizes = np.bincount(labels, minlength=k)
        for c in range(k):
            if sizes[c] > 0:
                continue
            own = d2[np.arange(n), labels].copy()
            own[sizes[labels] < 2] = -np.inf
            far = int(own.argmax())
            sizes[labels[far]] -= 1
            labels[far] = c
            sizes[c] += 1
        new_centers = np.empty_like(centers)
        for c in range(k):
            new_centers[c] = points[labels == c].mean(axis=0)
        shift = np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max()
        centers = new_centers
        if shift <= tol:
            break
    diff = points[:, None, :] - centers[None, :, :]
    d2 = np.einsum("nkd,nkd->nk", diff, diff)
    inertia = float(d2[np.arange(n), labels].sum())
    return labels, inertia


def check_seed(seed: int) -> int:
    """Seeds feed numpy's generator, which wants non-negative integers."""
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ParameterError(f"seed must be a non-negative integer, got {seed!r}")
    return int(seed)


def kmeans(points: np.ndarray, k: int, seed: int = 0, restarts: int = 10,
           max_iter: int = 300, tol: float = 1e-6) -> ClusterAssignment:
    """Seeded k-means++ with Lloyd refinement; best of ``restarts`` runs."""
    seed = check_seed(seed)
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    n = len(points)
    if not 1 <= k <= n:
        raise ParameterError(f"k={k} out of range for n={n} points")
    best_labels: np.ndarray | None = None
    best_inertia = np.inf
    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        centers = _kmeans_pp_init(points, k, rng)
        labels, inertia = _lloyd(points, centers, max_iter, tol)
        if inertia < best_inertia:
            best_inertia = inertia
            best_labels = labels
    assert best_labels is not None
    return ClusterAssignment.from_labels(best_labels, k)


def spectral_cluster(affinity: AffinityMatrix, k: int, variant: str = NORMALIZED,
                     seed: int = 0, normalize_rows: bool = False) -> ClusterAssignment:
    """Laplacian -> embedding -> k-means on the embedding rows.

    When the graph has exactly k connected components the zero eigenspace
    is spanned by the component indicators, so the assignment recovers
    the components exactly.
    """
    n = affinity.n
    if n < 2:
        raise ParameterError(f"spectral clustering needs >= 2 vertices, got {n}")
    if not 1 <= k <= n:
        raise ParameterError(f"k={k} out of range for n={n}")
    lap = build_laplacian(affinity, variant)
    embedding = spectral_embedding(lap, k)
    rows = embedding.vectors
    if normalize_rows:
        norms = np.sqrt((rows ** 2).sum(axis=1, keepdims=True))
        rows = rows / np.maximum(norms, 1e-300)
    return kmeans(rows, k, seed=seed)
