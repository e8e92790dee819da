"""Top Mask Selection: drop small noise masks, keep the largest 1/t."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EmptyMaskError, ParameterError
from .masks import MaskSet


@dataclass(frozen=True)
class TmsConfig:
    """t is the fraction denominator; t=1 keeps everything."""

    t: int = 3

    def __post_init__(self):
        if self.t < 1:
            raise ParameterError(f"TMS t must be >= 1, got {self.t}")


def top_mask_selection(masks: MaskSet, cfg: TmsConfig) -> MaskSet:
    """Keep the ceil(n/t) largest masks (at least one).

    Output is ordered by area descending, ties by ascending id, so the
    selection is independent of the input order.
    """
    n = len(masks)
    if n == 0:
        raise EmptyMaskError("cannot select from an empty mask set")
    keep = max(1, math.ceil(n / cfg.t))
    ranked = sorted(masks.masks, key=lambda m: (-m.area, m.id))
    return MaskSet(image_height=masks.image_height, image_width=masks.image_width,
                   masks=ranked[:keep], file_name=masks.file_name)
