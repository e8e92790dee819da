"""Deterministic synthetic data for desk-scale runs: a three-circles
point set for the clustering demo, and mask/ground-truth scenes that
exercise every pipeline stage without a segmentation model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .edges import mask_boundary
from .errors import ParameterError
from .evaluation import GroundTruth
from .masks import MaskRecord, MaskSet
from .spectral import check_seed

CIRCLE_RADII = (0.1, 0.5, 1.0)
POINTS_PER_CIRCLE = 100


@dataclass(frozen=True)
class CirclesDataset:
    points: np.ndarray  # (300, 2)
    labels: np.ndarray  # circle index per point


def gen_circles(seed: int = 0, noise_sigma: float = 0.02) -> CirclesDataset:
    """Points at uniform angles on three concentric circles (radii
    0.1 / 0.5 / 1.0, 100 points each) plus isotropic Gaussian noise.

    Angles are evenly spaced with a random per-circle phase, so with
    zero noise the circles are exact and their k-NN graphs stay
    disconnected (randomly drawn angles can clump enough to bridge
    adjacent circles through a 10-NN union graph).
    """
    if noise_sigma < 0:
        raise ParameterError("noise_sigma must be >= 0")
    rng = np.random.default_rng(check_seed(seed))
    points = []
    labels = []
    for idx, radius in enumerate(CIRCLE_RADII):
        phase = rng.uniform(0.0, 2.0 * np.pi)
        theta = phase + 2.0 * np.pi * np.arange(POINTS_PER_CIRCLE) / POINTS_PER_CIRCLE
        xy = radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
        if noise_sigma > 0:
            xy = xy + rng.normal(0.0, noise_sigma, xy.shape)
        points.append(xy)
        labels.append(np.full(POINTS_PER_CIRCLE, idx))
    return CirclesDataset(points=np.concatenate(points),
                          labels=np.concatenate(labels))


@dataclass(frozen=True)
class SceneInfo:
    """Construction metadata: which group each mask id belongs to.

    Groups are "shape<i>" for a large shape and its duplicates,
    "background" for the complement mask, "blob" for noise blobs.
    """

    groups: dict[int, str]
    n_shapes: int


SCENE_HEIGHT = 120
SCENE_WIDTH = 160


def _rect(h: int, w: int, y0: int, x0: int, sh: int, sw: int) -> np.ndarray:
    grid = np.zeros((h, w), dtype=bool)
    grid[y0:y0 + sh, x0:x0 + sw] = True
    return grid


def _ellipse(h: int, w: int, cy: float, cx: float, ry: float, rx: float) -> np.ndarray:
    yy, xx = np.mgrid[0:h, 0:w]
    return ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0


def _erode(grid: np.ndarray) -> np.ndarray:
    return grid & ~mask_boundary(grid)


def gen_synthetic_scene(seed: int = 0, with_info: bool = False):
    """A 120x160 scene: 2-4 large disjoint shapes, each present as a
    clean mask plus two overlapping fragments (subsets, so their overlap
    ratio against the clean mask is exactly 1), one background mask
    covering the complement, and a flock of small noise blobs. Ground
    truth has two annotators tracing only the large-shape contours, so
    the blobs and the image-border response of the background mask are
    pure noise for the benchmark.
    """
    rng = np.random.default_rng(check_seed(seed))
    h, w = SCENE_HEIGHT, SCENE_WIDTH
    n_shapes = int(rng.integers(2, 5))

    # non-overlapping placement on a fixed grid of cells
    cells = [(10, 10), (10, 85), (62, 10), (62, 85)]
    order = rng.permutation(len(cells))[:n_shapes]
    shapes: list[np.ndarray] = []
    for cell_idx in order:
        cy0, cx0 = cells[cell_idx]
        sh = int(rng.integers(28, 42))
        sw = int(rng.integers(38, 60))
        y0 = cy0 + int(rng.integers(0, 6))
        x0 = cx0 + int(rng.integers(0, 8))
        if rng.random() < 0.5:
            shapes.append(_rect(h, w, y0, x0, sh, sw))
        else:
            shapes.append(_ellipse(h, w, y0 + sh / 2.0, x0 + sw / 2.0,
                                   sh / 2.0, sw / 2.0))

    masks: list[MaskRecord] = []
    groups: dict[int, str] = {}
    next_id = 0

    def add(grid: np.ndarray, group: str, score: float) -> None:
        nonlocal next_id
        masks.append(MaskRecord.from_grid(next_id, grid, score=score))
        groups[next_id] = group
        next_id += 1

    for i, shape in enumerate(shapes):
        group = f"shape{i}"
        cols = np.flatnonzero(shape.any(axis=0))
        split_lo = cols[0] + int(0.35 * len(cols))
        split_hi = cols[0] + int(0.65 * len(cols))
        left = shape.copy()
        left[:, split_hi:] = False
        right = shape.copy()
        right[:, :split_lo] = False
        add(shape, group, 0.9)
        add(left, group, 0.8)
        add(right, group, 0.7)

    background = ~np.logical_or.reduce(shapes)
    add(background, "background", 0.95)

    n_large = len(masks)
    n_blobs = int(rng.integers(10, 2 * n_large + 1))
    for _ in range(n_blobs):
        by = int(rng.integers(3, h - 8))
        bx = int(rng.integers(3, w - 8))
        r = float(rng.uniform(1.5, 4.0))
        add(_ellipse(h, w, by, bx, r, r), "blob", float(rng.uniform(0.1, 0.5)))

    mask_set = MaskSet(image_height=h, image_width=w, masks=masks,
                       file_name=f"scene{seed}")

    contours = np.zeros((h, w), dtype=bool)
    contours_wide = np.zeros((h, w), dtype=bool)
    for shape in shapes:
        contours |= mask_boundary(shape)
        contours_wide |= mask_boundary(_erode(shape))
    gt = GroundTruth(annotations=(contours, contours_wide))

    if with_info:
        return mask_set, gt, SceneInfo(groups=groups, n_shapes=n_shapes)
    return mask_set, gt
