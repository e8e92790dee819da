"""Binary segmentation masks: RLE codec, geometry, box NMS, JSON I/O.

RLE convention: column-major pixel order, alternating background /
foreground runs, always starting with a (possibly zero-length)
background run. This is the uncompressed COCO layout, so dumps from
other tools interoperate directly.

Mask file format (one JSON document per image):

    {"image": {"height": H, "width": W, "file_name": "..."},
     "masks": [{"id": 0,
                "rle": {"size": [H, W], "counts": [..]},
                "score": 0.9 | null,
                "logits_file": "relative/path.f32" | null}, ...]}

Logit sidecars are raw little-endian float32, row-major, H*W values.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyMaskError, MalformedInputError, ParameterError

log = logging.getLogger(__name__)

Box = tuple[int, int, int, int]  # (x_min, y_min, width, height)


@dataclass(frozen=True)
class RLE:
    """Run-length encoded binary mask."""

    height: int
    width: int
    counts: tuple[int, ...]

    def __post_init__(self):
        if self.height <= 0 or self.width <= 0:
            raise MalformedInputError(f"bad RLE dimensions {self.height}x{self.width}")
        if any(c < 0 for c in self.counts):
            raise MalformedInputError("negative run length")
        total = sum(self.counts)
        if total != self.height * self.width:
            raise MalformedInputError(
                f"run lengths sum to {total}, expected {self.height * self.width}"
            )

    @property
    def area(self) -> int:
        """Foreground pixel count (sum of odd-indexed runs)."""
        return sum(self.counts[1::2])

    def foreground_runs(self) -> tuple[np.ndarray, np.ndarray]:
        """Half-open [start, end) foreground intervals in flat column-major order."""
        bounds = np.concatenate([[0], np.cumsum(np.asarray(self.counts, dtype=np.int64))])
        starts = bounds[1:-1:2]
        ends = bounds[2::2]
        keep = ends > starts
        return starts[keep], ends[keep]


def rle_decode(rle: RLE) -> np.ndarray:
    """Decode to a (height, width) boolean grid."""
    counts = np.asarray(rle.counts, dtype=np.int64)
    values = np.zeros(len(counts), dtype=bool)
    values[1::2] = True
    flat = np.repeat(values, counts)
    return flat.reshape((rle.height, rle.width), order="F")


def rle_encode(grid: np.ndarray) -> RLE:
    """Encode a boolean grid; inverse of rle_decode."""
    grid = np.asarray(grid)
    if grid.ndim != 2 or grid.size == 0:
        raise MalformedInputError("mask grid must be a nonempty 2-D array")
    flat = grid.astype(bool).ravel(order="F")
    boundaries = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    edges = np.concatenate([[0], boundaries, [flat.size]])
    counts = np.diff(edges).tolist()
    if flat[0]:
        counts = [0] + counts
    return RLE(height=grid.shape[0], width=grid.shape[1], counts=tuple(int(c) for c in counts))


def mask_geometry(grid: np.ndarray) -> tuple[int, Box, tuple[float, float]]:
    """Area, tight bounding box and bbox center of a boolean grid.

    The box is (x_min, y_min, w, h) with x = column, y = row; the center
    is the geometric center of the box, so a single pixel at column 3 /
    row 4 yields bbox (3, 4, 1, 1) and center (3.5, 4.5).
    """
    grid = np.asarray(grid, dtype=bool)
    rows = np.flatnonzero(grid.any(axis=1))
    cols = np.flatnonzero(grid.any(axis=0))
    if len(rows) == 0:
        raise EmptyMaskError("mask has no foreground pixels")
    area = int(np.count_nonzero(grid))
    x_min, y_min = int(cols[0]), int(rows[0])
    w = int(cols[-1]) - x_min + 1
    h = int(rows[-1]) - y_min + 1
    center = (x_min + w / 2.0, y_min + h / 2.0)
    return area, (x_min, y_min, w, h), center


@dataclass(frozen=True)
class MaskRecord:
    """One binary mask plus its cached geometry."""

    id: int
    segmentation: RLE
    area: int
    bbox: Box
    center: tuple[float, float]
    logits: np.ndarray | None = None
    score: float | None = None

    @classmethod
    def from_grid(cls, mask_id: int, grid: np.ndarray, logits: np.ndarray | None = None,
                  score: float | None = None) -> "MaskRecord":
        area, bbox, center = mask_geometry(grid)
        return cls(id=mask_id, segmentation=rle_encode(grid), area=area,
                   bbox=bbox, center=center, logits=logits, score=score)

    def decode(self) -> np.ndarray:
        return rle_decode(self.segmentation)

    def probability_map(self) -> np.ndarray:
        """Per-pixel probability: sigmoid of the logits restricted to the
        foreground when a logit map exists, else the binary mask itself."""
        binary = self.decode()
        if self.logits is None:
            return binary.astype(np.float64)
        prob = 1.0 / (1.0 + np.exp(-self.logits.astype(np.float64)))
        return np.where(binary, prob, 0.0)


@dataclass
class MaskSet:
    """All masks for one image."""

    image_height: int
    image_width: int
    masks: list[MaskRecord] = field(default_factory=list)
    file_name: str = ""

    def __post_init__(self):
        ids = [m.id for m in self.masks]
        if len(set(ids)) != len(ids):
            raise MalformedInputError("duplicate mask ids")
        for m in self.masks:
            rle = m.segmentation
            if (rle.height, rle.width) != (self.image_height, self.image_width):
                raise MalformedInputError(
                    f"mask {m.id} is {rle.height}x{rle.width}, image is "
                    f"{self.image_height}x{self.image_width}"
                )

    def __len__(self) -> int:
        return len(self.masks)


def box_iou(a: Box, b: Box) -> float:
    """Intersection over union of two (x, y, w, h) boxes."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    if aw <= 0 or ah <= 0 or bw <= 0 or bh <= 0:
        raise ParameterError("boxes must have positive width and height")
    ix = max(0, min(ax + aw, bx + bw) - max(ax, bx))
    iy = max(0, min(ay + ah, by + bh) - max(ay, by))
    inter = ix * iy
    union = aw * ah + bw * bh - inter
    return inter / union


def _nms_score(m: MaskRecord, npix: int) -> float:
    # absent scores fall back to normalized area so ordering stays deterministic
    return m.score if m.score is not None else m.area / npix


def box_nms(masks: MaskSet, iou_threshold: float) -> MaskSet:
    """Greedy bounding-box NMS; keeps a mask iff its IoU with every
    previously kept mask is strictly below the threshold."""
    if not 0.0 < iou_threshold <= 1.0:
        raise ParameterError(f"NMS threshold {iou_threshold} not in (0, 1]")
    npix = masks.image_height * masks.image_width
    order = sorted(masks.masks, key=lambda m: (-_nms_score(m, npix), -m.area, m.id))
    kept: list[MaskRecord] = []
    for cand in order:
        if all(box_iou(cand.bbox, k.bbox) < iou_threshold for k in kept):
            kept.append(cand)
    return MaskSet(image_height=masks.image_height, image_width=masks.image_width,
                   masks=kept, file_name=masks.file_name)


def load_mask_file(path: str | Path) -> MaskSet:
    """Read an image's mask JSON (plus any logit sidecars)."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInputError(f"{path}: {exc}") from exc
    try:
        height = int(doc["image"]["height"])
        width = int(doc["image"]["width"])
        file_name = str(doc["image"].get("file_name", path.stem))
        entries = doc["masks"]
    except (KeyError, TypeError) as exc:
        raise MalformedInputError(f"{path}: missing field {exc}") from exc

    npix = height * width
    records: list[MaskRecord] = []
    for entry in entries:
        try:
            rle_doc = entry["rle"]
            size = rle_doc["size"]
            if [int(size[0]), int(size[1])] != [height, width]:
                raise MalformedInputError(
                    f"{path}: mask {entry.get('id')} size {size} != image size"
                )
            if not all(isinstance(c, int) for c in rle_doc["counts"]):
                raise MalformedInputError(f"{path}: RLE counts must be integers")
            rle = RLE(height=height, width=width, counts=tuple(rle_doc["counts"]))
        except (KeyError, TypeError) as exc:
            raise MalformedInputError(f"{path}: bad mask entry: {exc}") from exc
        if rle.area == 0:
            log.warning("%s: dropping zero-area mask id=%s", path.name, entry.get("id"))
            continue
        logits = None
        if entry.get("logits_file"):
            sidecar = path.parent / entry["logits_file"]
            raw = np.fromfile(sidecar, dtype="<f4")
            if raw.size != npix:
                raise MalformedInputError(
                    f"{sidecar}: expected {npix} float32 values, got {raw.size}"
                )
            logits = raw.reshape((height, width))
        grid = rle_decode(rle)
        area, bbox, center = mask_geometry(grid)
        score = entry.get("score")
        records.append(MaskRecord(
            id=int(entry["id"]), segmentation=rle, area=area, bbox=bbox, center=center,
            logits=logits, score=float(score) if score is not None else area / npix,
        ))
    return MaskSet(image_height=height, image_width=width, masks=records,
                   file_name=file_name)


def save_mask_file(masks: MaskSet, path: str | Path, logits_dir: str | Path | None = None) -> None:
    """Write the mask JSON; logit maps go to per-mask sidecar files."""
    path = Path(path)
    entries = []
    for m in masks.masks:
        logits_file = None
        if m.logits is not None:
            if logits_dir is None:
                logits_dir = path.parent
            sidecar_dir = Path(logits_dir)
            sidecar_dir.mkdir(parents=True, exist_ok=True)
            sidecar = sidecar_dir / f"{path.stem}_mask{m.id}.f32"
            m.logits.astype("<f4").tofile(sidecar)
            logits_file = str(sidecar.relative_to(path.parent))
        entries.append({
            "id": m.id,
            "rle": {"size": [masks.image_height, masks.image_width],
                    "counts": list(m.segmentation.counts)},
            "score": m.score,
            "logits_file": logits_file,
        })
    doc = {
        "image": {"height": masks.image_height, "width": masks.image_width,
                  "file_name": masks.file_name or path.stem},
        "masks": entries,
    }
    path.write_text(json.dumps(doc))
