import numpy as np
import pytest

from scesame.errors import MalformedInputError
from scesame.imgio import (read_annotation, read_pfm, read_pgm, write_pfm,
                           write_pgm)


class TestPfm:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        values = rng.random((13, 9)).astype(np.float32)
        path = tmp_path / "map.pfm"
        write_pfm(path, values)
        back = read_pfm(path)
        assert back.dtype == np.float32
        assert np.array_equal(back, values)

    def test_header_layout(self, tmp_path):
        path = tmp_path / "map.pfm"
        write_pfm(path, np.zeros((4, 6), dtype=np.float32))
        raw = path.read_bytes()
        assert raw.startswith(b"Pf\n6 4\n-1.0\n")
        assert len(raw) == len(b"Pf\n6 4\n-1.0\n") + 4 * 24

    def test_rows_are_bottom_up(self, tmp_path):
        values = np.zeros((3, 2), dtype=np.float32)
        values[0, 0] = 1.0  # top-left pixel
        path = tmp_path / "map.pfm"
        write_pfm(path, values)
        raw = path.read_bytes()
        payload = np.frombuffer(raw[len(b"Pf\n2 3\n-1.0\n"):], dtype="<f4")
        # top row is written last in a bottom-up PFM
        assert payload[4] == 1.0

    def test_rejects_other_magic(self, tmp_path):
        path = tmp_path / "x.pfm"
        path.write_bytes(b"PF\n2 2\n-1.0\n" + b"\x00" * 48)
        with pytest.raises(MalformedInputError):
            read_pfm(path)

    def test_rejects_truncation(self, tmp_path):
        path = tmp_path / "x.pfm"
        path.write_bytes(b"Pf\n4 4\n-1.0\n" + b"\x00" * 10)
        with pytest.raises(MalformedInputError):
            read_pfm(path)


class TestPgm:
    def test_round_trip_uint8(self, tmp_path):
        rng = np.random.default_rng(1)
        values = rng.integers(0, 256, (7, 11), dtype=np.uint8)
        path = tmp_path / "img.pgm"
        write_pgm(path, values)
        assert np.array_equal(read_pgm(path), values)

    def test_float_input_rounds(self, tmp_path):
        path = tmp_path / "img.pgm"
        write_pgm(path, np.array([[0.0, 0.5, 1.0]]))
        assert read_pgm(path).tolist() == [[0, 128, 255]]

    def test_comments_in_header(self, tmp_path):
        path = tmp_path / "img.pgm"
        payload = bytes(range(6))
        path.write_bytes(b"P5\n# a comment\n3 2\n# another\n255\n" + payload)
        img = read_pgm(path)
        assert img.shape == (2, 3)
        assert img.ravel().tolist() == list(range(6))

    def test_annotation_threshold(self, tmp_path):
        path = tmp_path / "ann.pgm"
        write_pgm(path, np.array([[0, 127, 128, 255]], dtype=np.uint8))
        assert read_annotation(path).tolist() == [[False, False, True, True]]

    def test_png_annotation(self, tmp_path):
        from PIL import Image

        arr = np.array([[0, 255], [255, 0]], dtype=np.uint8)
        path = tmp_path / "ann.png"
        Image.fromarray(arr).save(path)
        assert np.array_equal(read_annotation(path), arr > 0)
