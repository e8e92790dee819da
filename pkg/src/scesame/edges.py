"""Mask set to thinned edge map.

Stage order: per-mask Sobel responses restricted to mask boundaries,
pixelwise max + min-max normalization, boundary zero padding, Gaussian
blur, directional NMS. The zero band is re-applied at the very end so
the final map's border is exactly zero (the blur bleeds one pixel back
into the band otherwise).

Convolutions treat pixels outside the image as background (zero). That
is deliberate: a mask clipped by the image border produces a strong
response along the border, which is precisely the artifact the zero
padding stage exists to remove.

Edge maps are plain float64 arrays of shape (height, width) with values
in [0, 1] after normalization.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _kernels
from .affinity import AffinityParams, scesame_affinity
from .ensemble import EnsembleMask, cluster_count, merge_clusters, singleton_ensembles
from .errors import EmptyMaskError, ParameterError, ShapeError
from .masks import MaskSet, box_nms
from .spectral import NORMALIZED, VARIANTS, check_seed, spectral_cluster
from .tms import TmsConfig, top_mask_selection

log = logging.getLogger(__name__)

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T


@dataclass(frozen=True)
class EdgeConfig:
    blur_kernel: int = 3
    bzp_p: int = 5
    apply_nms: bool = True
    nms_low_suppress: float = 0.0

    def __post_init__(self):
        if self.blur_kernel < 1 or self.blur_kernel % 2 == 0:
            raise ParameterError(f"blur kernel must be odd and >= 1, got {self.blur_kernel}")
        if self.bzp_p < 0:
            raise ParameterError("zero-padding width must be >= 0")
        if not 0.0 <= self.nms_low_suppress < 1.0:
            raise ParameterError("nms_low_suppress must be in [0, 1)")


@dataclass(frozen=True)
class ScConfig:
    """Spectral-clustering stage parameters."""

    c: int = 2
    tau: float = 0.5
    scale_neighbor: int = 7
    variant: str = NORMALIZED
    seed: int = 0
    normalize_rows: bool = False

    def __post_init__(self):
        if self.c < 2:
            raise ParameterError(f"cluster divisor c must be >= 2, got {self.c}")
        if self.variant not in VARIANTS:
            raise ParameterError(f"unknown Laplacian variant {self.variant!r}")
        check_seed(self.seed)


def sobel_gradients(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3x3 Sobel pair, x = columns, y = rows; outside the image is zero."""
    values = np.asarray(values, dtype=np.float64)
    gx = ndimage.correlate(values, SOBEL_X, mode="constant", cval=0.0)
    gy = ndimage.correlate(values, SOBEL_Y, mode="constant", cval=0.0)
    return gx, gy


def mask_boundary(binary: np.ndarray) -> np.ndarray:
    """Foreground pixels 4-adjacent to background or to the image border."""
    binary = np.asarray(binary, dtype=bool)
    padded = np.pad(binary, 1, mode="constant", constant_values=False)
    interior = (padded[:-2, 1:-1] & padded[2:, 1:-1]
                & padded[1:-1, :-2] & padded[1:-1, 2:])
    return binary & ~interior


def mask_edge_response(mask: EnsembleMask) -> np.ndarray:
    """Sobel magnitude of the probability map, kept only on the boundary."""
    binary = np.asarray(mask.probability) > 0
    if not binary.any():
        raise EmptyMaskError("edge response needs a nonempty mask")
    gx, gy = sobel_gradients(mask.probability)
    magnitude = np.sqrt(gx * gx + gy * gy)
    return np.where(mask_boundary(binary), magnitude, 0.0)


def aggregate_normalize(responses: list[np.ndarray]) -> np.ndarray:
    """Pixelwise max over responses, then min-max to [0, 1].

    A constant aggregate (max == min) normalizes to all zeros.
    """
    if not responses:
        raise ParameterError("need at least one response")
    shape = responses[0].shape
    for r in responses[1:]:
        if r.shape != shape:
            raise ShapeError(f"response shapes differ: {r.shape} vs {shape}")
    agg = responses[0]
    for r in responses[1:]:
        agg = np.maximum(agg, r)
    lo = agg.min()
    hi = agg.max()
    if hi == lo:
        return np.zeros(shape)
    return (agg - lo) / (hi - lo)


def gaussian_kernel_1d(kernel: int) -> np.ndarray:
    """Normalized 1-D Gaussian weights; sigma follows the usual
    kernel-size rule sigma = 0.3*((kernel-1)/2 - 1) + 0.8."""
    if kernel < 1 or kernel % 2 == 0:
        raise ParameterError(f"kernel size must be odd and >= 1, got {kernel}")
    radius = (kernel - 1) // 2
    sigma = 0.3 * (radius - 1) + 0.8
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    weights = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return weights / weights.sum()


def gaussian_blur(edge_map: np.ndarray, kernel: int) -> np.ndarray:
    """Separable Gaussian smoothing with reflected borders."""
    if kernel == 1:
        return np.array(edge_map, dtype=np.float64)
    weights = gaussian_kernel_1d(kernel)
    out = ndimage.correlate1d(np.asarray(edge_map, dtype=np.float64), weights,
                              axis=0, mode="reflect")
    return ndimage.correlate1d(out, weights, axis=1, mode="reflect")


def edge_nms(edge_map: np.ndarray, low_suppress: float = 0.0) -> np.ndarray:
    """Thin edges by suppressing pixels that are not local maxima along
    their gradient direction (bilinear interpolation at unit offsets).

    Survivors keep their exact value; suppressed pixels are scaled by
    ``low_suppress`` (0 removes them outright).
    """
    values = np.asarray(edge_map, dtype=np.float64)
    gx, gy = sobel_gradients(values)
    return _kernels.nms_suppress(values, gx, gy, float(low_suppress))


def boundary_zero_padding(edge_map: np.ndarray, p: int) -> np.ndarray:
    """Zero all pixels within p of the image border."""
    if p < 0:
        raise ParameterError("p must be >= 0")
    out = np.array(edge_map, dtype=np.float64)
    if p == 0:
        return out
    h, w = out.shape
    if 2 * p >= min(h, w):
        log.warning("zero band of %d pixels covers the whole %dx%d map", p, h, w)
    out[:p, :] = 0.0
    out[h - p:, :] = 0.0
    out[:, :p] = 0.0
    out[:, w - p:] = 0.0
    return out


def combine_masks(masks: MaskSet, *, nms_iou: float | None = 0.7,
                  tms: TmsConfig | None = None,
                  sc: ScConfig | None = None) -> tuple[list[EnsembleMask], dict]:
    """Mask-space half of the pipeline: dedup, selection, clustering.

    nms_iou / tms / sc are each optional stages (None skips them), which
    covers every ablation: no stage, selection only, clustering only, or
    both. A lone surviving mask becomes its own cluster. Returns the
    ensemble masks plus stage-wise counts for the run manifest.
    """
    if len(masks) == 0:
        raise EmptyMaskError("no masks to detect edges from")
    counts = {"input": len(masks)}
    if nms_iou is not None:
        masks = box_nms(masks, nms_iou)
    counts["after_box_nms"] = len(masks)
    if tms is not None:
        masks = top_mask_selection(masks, tms)
    counts["after_tms"] = len(masks)
    if sc is not None and len(masks) >= 2:
        k = cluster_count(len(masks), sc.c)
        params = AffinityParams(tau=sc.tau, local_scale_neighbor=sc.scale_neighbor)
        assignment = spectral_cluster(scesame_affinity(masks, params), k,
                                      variant=sc.variant, seed=sc.seed,
                                      normalize_rows=sc.normalize_rows)
        ensembles = merge_clusters(masks, assignment)
        counts["clusters"] = k
    else:
        ensembles = singleton_ensembles(masks)
    counts["ensembles"] = len(ensembles)
    return ensembles, counts


def edges_from_ensembles(ensembles: list[EnsembleMask],
                         edge: EdgeConfig = EdgeConfig()) -> np.ndarray:
    """Edge-space half: responses, aggregate, zero band, blur, NMS."""
    responses = [mask_edge_response(e) for e in ensembles]
    edge_map = aggregate_normalize(responses)
    edge_map = boundary_zero_padding(edge_map, edge.bzp_p)
    if edge.blur_kernel > 1:
        edge_map = gaussian_blur(edge_map, edge.blur_kernel)
    if edge.apply_nms:
        edge_map = edge_nms(edge_map, edge.nms_low_suppress)
    return boundary_zero_padding(edge_map, edge.bzp_p)


def detect_edges(masks: MaskSet, *, nms_iou: float | None = 0.7,
                 tms: TmsConfig | None = None, sc: ScConfig | None = None,
                 edge: EdgeConfig = EdgeConfig()) -> tuple[np.ndarray, dict]:
    """Full pipeline over one image's masks; returns the edge map and a
    dict of stage-wise mask counts for the run manifest."""
    ensembles, counts = combine_masks(masks, nms_iou=nms_iou, tms=tms, sc=sc)
    return edges_from_ensembles(ensembles, edge), counts
