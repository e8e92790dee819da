"""Edge-map and annotation file I/O.

PFM (portable float map) carries exact float32 values; the grayscale
"Pf" variant is written little-endian (negative scale) with the usual
bottom-to-top row order. PGM ("P5", maxval 255) is the lossy companion
for quick inspection: value = round(255 * v).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import MalformedInputError

__all__ = [
    "write_pfm", "read_pfm", "write_pgm", "read_pgm", "read_annotation",
]


def write_pfm(path: str | Path, values: np.ndarray) -> None:
    values = np.asarray(values, dtype=np.float32)
    if values.ndim != 2:
        raise MalformedInputError("PFM writer takes a 2-D grayscale map")
    h, w = values.shape
    with open(path, "wb") as fh:
        fh.write(f"Pf\n{w} {h}\n-1.0\n".encode("ascii"))
        fh.write(values[::-1].astype("<f4").tobytes())


def read_pfm(path: str | Path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"Pf":
            raise MalformedInputError(f"{path}: not a grayscale PFM (magic {magic!r})")
        dims = fh.readline().split()
        if len(dims) != 2:
            raise MalformedInputError(f"{path}: bad PFM dimension line")
        w, h = int(dims[0]), int(dims[1])
        scale = float(fh.readline())
        dtype = "<f4" if scale < 0 else ">f4"
        raw = fh.read(4 * w * h)
        if len(raw) != 4 * w * h:
            raise MalformedInputError(f"{path}: truncated PFM payload")
        data = np.frombuffer(raw, dtype=dtype)
    return data.reshape((h, w))[::-1].astype(np.float32)


def write_pgm(path: str | Path, values: np.ndarray) -> None:
    """8-bit PGM; float inputs are assumed to be in [0, 1]."""
    values = np.asarray(values)
    if values.dtype != np.uint8:
        values = np.rint(np.clip(values, 0.0, 1.0) * 255.0).astype(np.uint8)
    h, w = values.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(values.tobytes())


def _read_pgm_token(fh) -> bytes:
    # whitespace-delimited token, skipping '#' comments
    token = b""
    while True:
        ch = fh.read(1)
        if not ch:
            raise MalformedInputError("truncated PGM header")
        if ch == b"#":
            fh.readline()
            continue
        if ch.isspace():
            if token:
                return token
            continue
        token += ch


def read_pgm(path: str | Path) -> np.ndarray:
    with open(path, "rb") as fh:
        if _read_pgm_token(fh) != b"P5":
            raise MalformedInputError(f"{path}: not a binary PGM")
        w = int(_read_pgm_token(fh))
        h = int(_read_pgm_token(fh))
        maxval = int(_read_pgm_token(fh))
        if not 0 < maxval < 256:
            raise MalformedInputError(f"{path}: unsupported maxval {maxval}")
        data = np.frombuffer(fh.read(w * h), dtype=np.uint8)
        if data.size != w * h:
            raise MalformedInputError(f"{path}: truncated PGM payload")
    return data.reshape((h, w)).copy()


def read_annotation(path: str | Path) -> np.ndarray:
    """Binary edge annotation from a PGM or PNG file: value >= 128 is edge."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        gray = read_pgm(path)
    else:
        from PIL import Image

        gray = np.asarray(Image.open(path).convert("L"))
    return gray >= 128
