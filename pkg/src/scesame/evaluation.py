"""Boundary-benchmark evaluation: tolerance matching, ODS/OIS/AP.

Protocol: predictions are binarized at 99 thresholds (0.01..0.99). At
each threshold the predicted edge pixels are matched one-to-one against
every annotator's pixels by maximum-cardinality bipartite matching,
with an edge wherever the Euclidean distance is at most
tolerance_fraction * image diagonal. A predicted pixel counts once
toward precision no matter how many annotators it matches; recall sums
matched ground-truth pixels over annotators.

ODS maximizes F over a single dataset-wide threshold using aggregated
counts; OIS aggregates each image's counts at that image's own best
threshold. AP averages precision sampled at recalls 0.01..1.00 from
the dataset PR curve (zero precision past the highest achieved recall).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ParameterError, ShapeError

THRESHOLDS = tuple(round(i / 100.0, 2) for i in range(1, 100))


@dataclass(frozen=True)
class GroundTruth:
    """One image's annotations: a stack of same-shape binary edge maps."""

    annotations: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.annotations) == 0:
            raise ParameterError("ground truth needs at least one annotation")
        shape = self.annotations[0].shape
        for a in self.annotations[1:]:
            if a.shape != shape:
                raise ShapeError("annotation shapes differ")

    @property
    def shape(self) -> tuple[int, int]:
        return self.annotations[0].shape


@dataclass(frozen=True)
class PrPoint:
    """Counts and rates at one threshold.

    tp/fp count predicted pixels (matched once / unmatched); tp_gt/fn
    count ground-truth pixels summed over annotators. Both sides are
    needed: precision aggregates the prediction side, recall the
    ground-truth side.
    """

    threshold: float
    tp: int
    fp: int
    tp_gt: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, threshold: float, tp: int, fp: int, tp_gt: int, fn: int) -> "PrPoint":
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp_gt / (tp_gt + fn) if tp_gt + fn > 0 else 0.0
        f1 = 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        return cls(threshold=threshold, tp=tp, fp=fp, tp_gt=tp_gt, fn=fn,
                   precision=precision, recall=recall, f1=f1)


@dataclass
class ImageBest:
    name: str
    threshold: float
    f1: float


@dataclass
class MetricsReport:
    ods: float
    ois: float
    ap: float
    ods_threshold: float
    tolerance_fraction: float
    per_threshold: list[PrPoint]
    per_image_best: list[ImageBest] = field(default_factory=list)

    def to_json(self) -> str:
        doc = {
            "ods": self.ods,
            "ois": self.ois,
            "ap": self.ap,
            "ods_threshold": self.ods_threshold,
            "tolerance": self.tolerance_fraction,
            "per_threshold": [vars(p) for p in self.per_threshold],
            "per_image": [vars(b) for b in self.per_image_best],
        }
        return json.dumps(doc, indent=1)


def _edge_pixels(binary: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = np.nonzero(binary)
    return rows.astype(np.int64), cols.astype(np.int64)


def correspond_pixels(pred: np.ndarray, gt: np.ndarray,
                      max_dist: float) -> tuple[np.ndarray, np.ndarray]:
    """Match predicted and ground-truth edge pixels within max_dist.

    Returns boolean maps marking the matched pixels on each side. The
    matching has maximum cardinality over the proximity graph.
    """
    pred = np.asarray(pred, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    if pred.shape != gt.shape:
        raise ShapeError(f"prediction {pred.shape} vs ground truth {gt.shape}")
    if max_dist < 0:
        raise ParameterError("max_dist must be >= 0")
    pr, pc = _edge_pixels(pred)
    gr, gc = _edge_pixels(gt)
    pred_flags, gt_flags = _kernels.match_pixels(pr, pc, gr, gc, float(max_dist))
    matched_pred = np.zeros_like(pred)
    matched_gt = np.zeros_like(gt)
    matched_pred[pr[pred_flags], pc[pred_flags]] = True
    matched_gt[gr[gt_flags], gc[gt_flags]] = True
    return matched_pred, matched_gt


def _threshold_counts(pred_bin: np.ndarray, gts: GroundTruth,
                      max_dist: float) -> tuple[int, int, int, int]:
    """(tp, fp, tp_gt, fn) for one binarized prediction."""
    n_pred = int(np.count_nonzero(pred_bin))
    matched_any = np.zeros_like(pred_bin, dtype=bool)
    tp_gt = 0
    total_gt = 0
    for annotation in gts.annotations:
        total_gt += int(np.count_nonzero(annotation))
        if n_pred == 0:
            continue
        matched_pred, matched_gt = correspond_pixels(pred_bin, annotation, max_dist)
        matched_any |= matched_pred
        tp_gt += int(np.count_nonzero(matched_gt))
    tp = int(np.count_nonzero(matched_any))
    return tp, n_pred - tp, tp_gt, total_gt - tp_gt


def prf_at_threshold(pred: np.ndarray, gts: GroundTruth, threshold: float,
                     max_dist: float) -> PrPoint:
    """Binarize (>= threshold), match against every annotator, score."""
    if not 0.0 < threshold < 1.0:
        raise ParameterError(f"threshold {threshold} not in (0, 1)")
    pred = np.asarray(pred)
    if pred.shape != gts.shape:
        raise ShapeError(f"prediction {pred.shape} vs ground truth {gts.shape}")
    tp, fp, tp_gt, fn = _threshold_counts(pred >= threshold, gts, max_dist)
    return PrPoint.from_counts(threshold, tp, fp, tp_gt, fn)


def image_threshold_sweep(pred: np.ndarray, gts: GroundTruth, max_dist: float,
                          thresholds=THRESHOLDS, thin: bool = False) -> np.ndarray:
    """Counts for every threshold: int64 array of rows (tp, fp, tp_gt, fn)."""
    pred = np.asarray(pred, dtype=np.float64)
    if pred.shape != gts.shape:
        raise ShapeError(f"prediction {pred.shape} vs ground truth {gts.shape}")
    if thin:
        try:
            from skimage.morphology import thin as morph_thin
        except ImportError as exc:
            raise ParameterError(
                "thinning needs scikit-image (pip install scesame[thin])") from exc
    out = np.zeros((len(thresholds), 4), dtype=np.int64)
    for i, t in enumerate(thresholds):
        pred_bin = pred >= t
        if thin:
            pred_bin = morph_thin(pred_bin)
        out[i] = _threshold_counts(pred_bin, gts, max_dist)
    return out


def _f1_from_rows(rows: np.ndarray) -> np.ndarray:
    tp = rows[:, 0].astype(np.float64)
    fp = rows[:, 1].astype(np.float64)
    tp_gt = rows[:, 2].astype(np.float64)
    fn = rows[:, 3].astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(tp + fp > 0, tp / (tp + fp), 0.0)
        recall = np.where(tp_gt + fn > 0, tp_gt / (tp_gt + fn), 0.0)
        f1 = np.where(precision + recall > 0,
                      2.0 * precision * recall / (precision + recall), 0.0)
    return f1


def ods_ois(per_image_counts: list[np.ndarray],
            thresholds=THRESHOLDS) -> tuple[float, float, float, list[tuple[float, float]]]:
    """Dataset- and image-scale optimal F from per-image count sweeps.

    Returns (ods, ois, ods_threshold, per-image (best_threshold, best_f1)).
    Ties resolve to the lowest threshold.
    """
    if not per_image_counts:
        raise ParameterError("empty dataset")
    stack = np.stack(per_image_counts)  # (images, thresholds, 4)
    dataset_f1 = _f1_from_rows(stack.sum(axis=0))
    ods_idx = int(dataset_f1.argmax())
    ods = float(dataset_f1[ods_idx])

    best: list[tuple[float, float]] = []
    ois_counts = np.zeros(4, dtype=np.int64)
    for counts in per_image_counts:
        f1 = _f1_from_rows(counts)
        idx = int(f1.argmax())
        best.append((thresholds[idx], float(f1[idx])))
        ois_counts += counts[idx]
    ois = float(_f1_from_rows(ois_counts[None, :])[0])
    return ods, ois, thresholds[ods_idx], best


def average_precision(per_threshold: list[PrPoint]) -> float:
    """Mean of precision interpolated at recalls 0.01..1.00.

    Past the highest achieved recall precision is 0; below the lowest it
    holds at the lowest-recall point's precision. Duplicate recalls keep
    their best precision.
    """
    if not per_threshold:
        raise ParameterError("need at least one PR point")
    by_recall: dict[float, float] = {}
    for p in per_threshold:
        if p.recall not in by_recall or p.precision > by_recall[p.recall]:
            by_recall[p.recall] = p.precision
    recalls = np.array(sorted(by_recall))
    precisions = np.array([by_recall[r] for r in recalls])
    samples = np.arange(1, 101, dtype=np.float64) / 100.0
    interp = np.interp(samples, recalls, precisions,
                       left=precisions[0], right=0.0)
    interp[samples > recalls[-1]] = 0.0
    return float(interp.mean())


def evaluate_dataset(preds: list[np.ndarray], gts: list[GroundTruth],
                     tolerance_fraction: float = 0.0075, thin: bool = False,
                     names: list[str] | None = None) -> MetricsReport:
    """Sweep thresholds for every image and aggregate ODS/OIS/AP."""
    if len(preds) != len(gts):
        raise ParameterError(f"{len(preds)} predictions vs {len(gts)} ground truths")
    if tolerance_fraction <= 0:
        raise ParameterError("tolerance_fraction must be positive")
    if names is None:
        names = [f"image{i}" for i in range(len(preds))]
    per_image = []
    for pred, gt in zip(preds, gts):
        h, w = gt.shape
        max_dist = tolerance_fraction * float(np.hypot(h, w))
        per_image.append(image_threshold_sweep(pred, gt, max_dist, thin=thin))
    ods, ois, ods_threshold, best = ods_ois(per_image)
    totals = np.stack(per_image).sum(axis=0)
    table = [PrPoint.from_counts(t, *row) for t, row in zip(THRESHOLDS, totals.tolist())]
    ap = average_precision(table)
    return MetricsReport(
        ods=ods, ois=ois, ap=ap, ods_threshold=ods_threshold,
        tolerance_fraction=tolerance_fraction, per_threshold=table,
        per_image_best=[ImageBest(name=n, threshold=t, f1=f)
                        for n, (t, f) in zip(names, best)],
    )
