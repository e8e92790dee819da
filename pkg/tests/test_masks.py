import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from scesame.errors import EmptyMaskError, MalformedInputError, ParameterError
from scesame.masks import (RLE, MaskRecord, MaskSet, box_iou, box_nms,
                           load_mask_file, mask_geometry, rle_decode,
                           rle_encode, save_mask_file)

from conftest import reference_greedy_nms, reference_rle_decode


class TestRle:
    def test_full_foreground(self):
        grid = rle_decode(RLE(2, 2, (0, 4)))
        assert grid.all() and grid.shape == (2, 2)

    def test_all_background(self):
        grid = rle_decode(RLE(2, 2, (4,)))
        assert not grid.any()

    def test_column_major_unroll(self):
        # 1 background, 2 foreground, 3 background: flat column-major
        # positions 1 and 2 are (row1, col0) and (row2, col0)
        grid = rle_decode(RLE(3, 2, (1, 2, 3)))
        expected = np.zeros((3, 2), dtype=bool)
        expected[1, 0] = expected[2, 0] = True
        assert np.array_equal(grid, expected)
        assert np.array_equal(grid, reference_rle_decode(3, 2, (1, 2, 3)))

    def test_encode_trivial(self):
        assert rle_encode(np.zeros((2, 2), dtype=bool)).counts == (4,)
        assert rle_encode(np.ones((2, 2), dtype=bool)).counts == (0, 4)

    def test_sum_mismatch_rejected(self):
        with pytest.raises(MalformedInputError):
            RLE(2, 2, (3,))

    def test_negative_count_rejected(self):
        with pytest.raises(MalformedInputError):
            RLE(2, 2, (-1, 5))

    @settings(max_examples=1000, deadline=None)
    @given(arrays(bool, (8, 8)))
    def test_round_trip(self, grid):
        rle = rle_encode(grid)
        assert np.array_equal(rle_decode(rle), grid)
        assert np.array_equal(reference_rle_decode(8, 8, rle.counts), grid)

    def test_round_trip_rectangular(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            h, w = rng.integers(1, 12, 2)
            grid = rng.random((h, w)) > rng.random()
            assert np.array_equal(rle_decode(rle_encode(grid)), grid)

    def test_foreground_runs_cover_area(self):
        rng = np.random.default_rng(3)
        grid = rng.random((9, 7)) > 0.5
        rle = rle_encode(grid)
        starts, ends = rle.foreground_runs()
        assert (ends - starts).sum() == rle.area == grid.sum()


class TestGeometry:
    def test_single_pixel(self):
        grid = np.zeros((8, 8), dtype=bool)
        grid[4, 3] = True  # column 3, row 4
        area, bbox, center = mask_geometry(grid)
        assert area == 1
        assert bbox == (3, 4, 1, 1)
        assert center == (3.5, 4.5)

    def test_full_grid(self):
        area, bbox, center = mask_geometry(np.ones((10, 10), dtype=bool))
        assert area == 100
        assert bbox == (0, 0, 10, 10)
        assert center == (5.0, 5.0)

    def test_l_shape(self):
        # rows 0..2 of column 0 plus the pixel at row 0, column 1
        grid = np.zeros((5, 5), dtype=bool)
        grid[0:3, 0] = True
        grid[0, 1] = True
        area, bbox, center = mask_geometry(grid)
        assert area == 4
        assert bbox == (0, 0, 2, 3)

    def test_center_inside_bbox(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            grid = rng.random((10, 14)) > 0.8
            if not grid.any():
                continue
            _, (x, y, w, h), (cx, cy) = mask_geometry(grid)
            assert x <= cx <= x + w and y <= cy <= y + h

    def test_empty_mask_rejected(self):
        with pytest.raises(EmptyMaskError):
            mask_geometry(np.zeros((4, 4), dtype=bool))


class TestBoxIou:
    def test_identical(self):
        assert box_iou((2, 3, 4, 5), (2, 3, 4, 5)) == 1.0

    def test_disjoint(self):
        assert box_iou((0, 0, 2, 2), (5, 5, 2, 2)) == 0.0

    def test_partial_overlap(self):
        assert box_iou((0, 0, 2, 2), (1, 0, 2, 2)) == pytest.approx(2 / 6)

    def test_symmetric_and_bounded(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            a = tuple(int(v) for v in rng.integers(1, 10, 4))
            b = tuple(int(v) for v in rng.integers(1, 10, 4))
            iou = box_iou(a, b)
            assert iou == box_iou(b, a)
            assert 0.0 <= iou <= 1.0


def _mask_set_from_boxes(boxes, scores):
    records = []
    for i, ((x, y, w, h), score) in enumerate(zip(boxes, scores)):
        grid = np.zeros((32, 32), dtype=bool)
        grid[y:y + h, x:x + w] = True
        records.append(MaskRecord.from_grid(i, grid, score=score))
    return MaskSet(image_height=32, image_width=32, masks=records)


class TestBoxNms:
    def test_identical_boxes_keep_best_score(self):
        ms = _mask_set_from_boxes([(4, 4, 6, 6), (4, 4, 6, 6)], [0.9, 0.8])
        out = box_nms(ms, 0.7)
        assert [m.id for m in out.masks] == [0]
        assert len(ms) == 2  # input untouched

    def test_disjoint_all_survive(self):
        ms = _mask_set_from_boxes([(0, 0, 4, 4), (10, 0, 4, 4), (20, 0, 4, 4)],
                                  [0.5, 0.6, 0.7])
        assert len(box_nms(ms, 0.7)) == 3

    def test_matches_greedy_reference(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            n = rng.integers(1, 11)
            boxes, scores = [], []
            for _ in range(n):
                x, y = rng.integers(0, 20, 2)
                w, h = rng.integers(1, 12, 2)
                boxes.append((int(x), int(y), int(w), int(h)))
                scores.append(float(rng.choice([0.2, 0.5, 0.5, 0.9])))
            ms = _mask_set_from_boxes(boxes, scores)
            threshold = float(rng.uniform(0.1, 1.0))
            got = [m.id for m in box_nms(ms, threshold).masks]
            areas = [w * h for (_, _, w, h) in boxes]
            want = reference_greedy_nms(boxes, scores, areas, list(range(n)), threshold)
            assert got == want

    def test_monotone_in_threshold(self):
        rng = np.random.default_rng(23)
        boxes = [(int(x), int(y), int(w), int(h))
                 for x, y, w, h in zip(rng.integers(0, 16, 8), rng.integers(0, 16, 8),
                                       rng.integers(2, 10, 8), rng.integers(2, 10, 8))]
        ms = _mask_set_from_boxes(boxes, [0.5] * 8)
        sizes = [len(box_nms(ms, t)) for t in (1.0, 0.8, 0.6, 0.4, 0.2, 0.05)]
        assert sizes == sorted(sizes, reverse=True)
        kept_ids = {m.id for m in box_nms(ms, 0.5).masks}
        assert kept_ids <= {m.id for m in ms.masks}

    def test_bad_threshold(self):
        ms = _mask_set_from_boxes([(0, 0, 2, 2)], [0.5])
        with pytest.raises(ParameterError):
            box_nms(ms, 0.0)


class TestMaskFileIo:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(31)
        records = []
        for i in range(4):
            grid = np.zeros((12, 10), dtype=bool)
            x, y = rng.integers(0, 5, 2)
            grid[y:y + 5, x:x + 4] = True
            logits = rng.normal(size=(12, 10)).astype(np.float32) if i % 2 else None
            records.append(MaskRecord.from_grid(i, grid, logits=logits, score=0.5 + i / 10))
        ms = MaskSet(image_height=12, image_width=10, masks=records, file_name="img0")
        path = tmp_path / "img0.json"
        save_mask_file(ms, path)
        loaded = load_mask_file(path)
        assert loaded.file_name == "img0"
        assert len(loaded) == 4
        for orig, back in zip(ms.masks, loaded.masks):
            assert orig.segmentation == back.segmentation
            assert orig.bbox == back.bbox
            assert back.score == pytest.approx(orig.score)
            if orig.logits is None:
                assert back.logits is None
            else:
                assert np.allclose(orig.logits, back.logits, atol=1e-7)

    def test_zero_area_mask_dropped_with_warning(self, tmp_path, caplog):
        doc = {
            "image": {"height": 4, "width": 4, "file_name": "x"},
            "masks": [
                {"id": 0, "rle": {"size": [4, 4], "counts": [16]}, "score": None,
                 "logits_file": None},
                {"id": 1, "rle": {"size": [4, 4], "counts": [0, 16]}, "score": None,
                 "logits_file": None},
            ],
        }
        path = tmp_path / "m.json"
        path.write_text(json.dumps(doc))
        with caplog.at_level("WARNING"):
            ms = load_mask_file(path)
        assert [m.id for m in ms.masks] == [1]
        assert "zero-area" in caplog.text

    def test_absent_score_defaults_to_normalized_area(self, tmp_path):
        doc = {
            "image": {"height": 4, "width": 4, "file_name": "x"},
            "masks": [{"id": 0, "rle": {"size": [4, 4], "counts": [0, 8, 8]},
                       "score": None, "logits_file": None}],
        }
        path = tmp_path / "m.json"
        path.write_text(json.dumps(doc))
        ms = load_mask_file(path)
        assert ms.masks[0].score == pytest.approx(8 / 16)

    def test_malformed_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(MalformedInputError):
            load_mask_file(path)
        path.write_text(json.dumps({"image": {"height": 2, "width": 2, "file_name": "x"},
                                    "masks": [{"id": 0, "rle": {"size": [2, 2],
                                                                "counts": [9]},
                                               "score": None, "logits_file": None}]}))
        with pytest.raises(MalformedInputError):
            load_mask_file(path)

    def test_duplicate_ids_rejected(self):
        grid = np.ones((4, 4), dtype=bool)
        with pytest.raises(MalformedInputError):
            MaskSet(image_height=4, image_width=4,
                    masks=[MaskRecord.from_grid(0, grid), MaskRecord.from_grid(0, grid)])
