import numpy as np
import pytest

from scesame.errors import ParameterError
from scesame.fixtures import (CIRCLE_RADII, POINTS_PER_CIRCLE, gen_circles,
                              gen_synthetic_scene)
from scesame.masks import mask_geometry


class TestCircles:
    def test_noise_free_points_sit_on_circles(self):
        data = gen_circles(seed=3, noise_sigma=0.0)
        radii = np.linalg.norm(data.points, axis=1)
        for idx, radius in enumerate(CIRCLE_RADII):
            got = radii[data.labels == idx]
            assert np.abs(got - radius).max() <= 1e-12

    def test_counts_and_labels(self):
        data = gen_circles(seed=0)
        assert data.points.shape == (3 * POINTS_PER_CIRCLE, 2)
        assert np.array_equal(np.bincount(data.labels), [100, 100, 100])

    def test_bit_identical_per_seed(self):
        a = gen_circles(seed=5)
        b = gen_circles(seed=5)
        assert np.array_equal(a.points, b.points)
        c = gen_circles(seed=6)
        assert not np.array_equal(a.points, c.points)

    def test_negative_noise_rejected(self):
        with pytest.raises(ParameterError):
            gen_circles(seed=0, noise_sigma=-0.1)


class TestScene:
    def test_deterministic_per_seed(self):
        a, gta = gen_synthetic_scene(seed=2)
        b, gtb = gen_synthetic_scene(seed=2)
        assert len(a) == len(b)
        for ma, mb in zip(a.masks, b.masks):
            assert ma.segmentation == mb.segmentation
        for x, y in zip(gta.annotations, gtb.annotations):
            assert np.array_equal(x, y)

    def test_mask_invariants_hold(self):
        for seed in range(5):
            masks, gt = gen_synthetic_scene(seed=seed)
            assert len(masks) >= 10
            for m in masks.masks:
                area, bbox, center = mask_geometry(m.decode())
                assert area == m.area
                assert bbox == m.bbox
                assert center == m.center

    def test_group_structure(self):
        masks, gt, info = gen_synthetic_scene(seed=1, with_info=True)
        by_group = {}
        for mask_id, group in info.groups.items():
            by_group.setdefault(group, []).append(mask_id)
        assert 2 <= info.n_shapes <= 4
        for i in range(info.n_shapes):
            assert len(by_group[f"shape{i}"]) == 3
        assert len(by_group["background"]) == 1
        assert 10 <= len(by_group["blob"]) <= 30

    def test_blobs_strictly_smaller_than_shape_masks(self):
        for seed in range(8):
            masks, _, info = gen_synthetic_scene(seed=seed, with_info=True)
            blob_areas = [m.area for m in masks.masks if info.groups[m.id] == "blob"]
            large_areas = [m.area for m in masks.masks if info.groups[m.id] != "blob"]
            assert max(blob_areas) < min(large_areas)

    def test_fragments_are_subsets_of_clean_shape(self):
        masks, _, info = gen_synthetic_scene(seed=4, with_info=True)
        for i in range(info.n_shapes):
            ids = [m for m in masks.masks if info.groups[m.id] == f"shape{i}"]
            clean = max(ids, key=lambda m: m.area)
            clean_grid = clean.decode()
            for frag in ids:
                assert (frag.decode() & ~clean_grid).sum() == 0

    def test_ground_truth_clear_of_border_band(self):
        for seed in range(8):
            _, gt = gen_synthetic_scene(seed=seed)
            for annotation in gt.annotations:
                assert not annotation[:5, :].any()
                assert not annotation[-5:, :].any()
                assert not annotation[:, :5].any()
                assert not annotation[:, -5:].any()
