"""Merging co-clustered masks into ensemble masks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MalformedInputError, ParameterError
from .masks import RLE, MaskRecord, MaskSet, mask_geometry, rle_decode, rle_encode
from .spectral import ClusterAssignment


@dataclass(frozen=True)
class EnsembleMask:
    """Union of the member masks with a fused per-pixel probability map.

    The probability is the pixelwise maximum over member probability
    maps (sigmoid of logits on the member support when available,
    otherwise the binary mask), so it is 1 on any pixel covered by a
    logit-free member and 0 off the union support.
    """

    member_ids: tuple[int, ...]
    segmentation: RLE
    probability: np.ndarray


def cluster_count(n: int, c: int) -> int:
    """Target cluster count: max(floor(n/c), 2), capped at n."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    if c < 2:
        raise ParameterError(f"c must be >= 2, got {c}")
    return min(max(n // c, 2), n)


def singleton_ensembles(masks: MaskSet) -> list[EnsembleMask]:
    """Wrap each mask as its own ensemble (the no-clustering path)."""
    return [
        EnsembleMask(member_ids=(m.id,), segmentation=m.segmentation,
                     probability=m.probability_map())
        for m in masks.masks
    ]


def merge_clusters(masks: MaskSet, assignment: ClusterAssignment) -> list[EnsembleMask]:
    """One ensemble mask per nonempty cluster, in cluster-label order."""
    labels = np.asarray(assignment.labels)
    if len(labels) != len(masks):
        raise MalformedInputError(
            f"assignment covers {len(labels)} masks, set has {len(masks)}")
    k = len(assignment.clusters)
    if np.any((labels < 0) | (labels >= k)):
        raise MalformedInputError("cluster label out of range")
    out: list[EnsembleMask] = []
    for members in assignment.clusters:
        if not members:
            continue
        records = [masks.masks[i] for i in members]
        union = np.zeros((masks.image_height, masks.image_width), dtype=bool)
        prob = np.zeros((masks.image_height, masks.image_width), dtype=np.float64)
        for rec in records:
            union |= rec.decode()
            prob = np.maximum(prob, rec.probability_map())
        out.append(EnsembleMask(
            member_ids=tuple(rec.id for rec in records),
            segmentation=rle_encode(union),
            probability=prob,
        ))
    return out


def ensembles_to_maskset(ensembles: list[EnsembleMask], image_height: int,
                         image_width: int, file_name: str = "") -> MaskSet:
    """Re-express ensemble masks as a plain mask set for serialization.

    Fused probability maps are not carried over; the exported masks are
    binary (logits_file stays null in the JSON dump).
    """
    npix = image_height * image_width
    records = []
    for new_id, ens in enumerate(ensembles):
        grid = rle_decode(ens.segmentation)
        area, bbox, center = mask_geometry(grid)
        records.append(MaskRecord(
            id=new_id, segmentation=ens.segmentation, area=area, bbox=bbox,
            center=center, logits=None, score=area / npix,
        ))
    return MaskSet(image_height=image_height, image_width=image_width,
                   masks=records, file_name=file_name)
