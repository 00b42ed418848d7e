"""Minimal PGM (P5) and PBM (P1) readers and writers.

Grayscale images travel as binary PGM with maxval 255; masks travel either as
PGM (any nonzero byte is foreground) or as plain-text PBM where 1 marks
foreground.
"""

from __future__ import annotations

import re

import numpy as np

from .errors import PnmError


def _strip_comments(data: bytes) -> bytes:
    return re.sub(rb"#[^\n\r]*", b" ", data)


def _header_ints(data: bytes, count: int) -> tuple[list[int], int]:
    """Parse `count` whitespace-separated integers, returning them and the
    offset of the byte right after the single whitespace that ends the header."""
    fields = []
    pos = 0
    while len(fields) < count:
        m = re.compile(rb"\s*(?:#[^\n\r]*[\n\r]\s*)*(\d+)").match(data, pos)
        if m is None:
            raise PnmError("truncated or malformed header")
        fields.append(int(m.group(1)))
        pos = m.end()
    return fields, pos + 1  # skip exactly one whitespace byte after the header


def read_pgm(path) -> np.ndarray:
    """Read a binary PGM into a uint8 array of shape (height, width)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise PnmError(f"{path}: expected P5 magic")
    (width, height, maxval), offset = _header_ints(data[2:], 3)
    if maxval < 1 or maxval > 255:
        raise PnmError(f"{path}: unsupported maxval {maxval}")
    raster = data[2 + offset:]
    if len(raster) < width * height:
        raise PnmError(f"{path}: raster shorter than {width}x{height}")
    return np.frombuffer(raster[: width * height], dtype=np.uint8).reshape(height, width)


def write_pgm(path, gray: np.ndarray) -> None:
    """Write a 2-D array as binary PGM. Float input is taken in [0, 1]."""
    arr = np.asarray(gray)
    if arr.ndim != 2:
        raise PnmError(f"PGM payload must be 2-D, got shape {arr.shape}")
    if np.issubdtype(arr.dtype, np.floating):
        arr = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    else:
        arr = arr.astype(np.uint8)
    height, width = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode())
        fh.write(arr.tobytes())


def read_pbm(path) -> np.ndarray:
    """Read a plain-text PBM into a uint8 {0, 1} array; 1 is foreground."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P1"):
        raise PnmError(f"{path}: expected P1 magic")
    body = _strip_comments(data[2:])
    (width, height), offset = _header_ints(body, 2)
    bits = [c - 48 for c in body[offset - 1:] if c in (48, 49)]
    if len(bits) < width * height:
        raise PnmError(f"{path}: raster shorter than {width}x{height}")
    return np.array(bits[: width * height], dtype=np.uint8).reshape(height, width)


def write_pbm(path, mask: np.ndarray) -> None:
    """Write a binary mask as plain-text PBM; nonzero values become 1."""
    arr = (np.asarray(mask) != 0).astype(np.uint8)
    if arr.ndim != 2:
        raise PnmError(f"PBM payload must be 2-D, got shape {arr.shape}")
    height, width = arr.shape
    lines = [" ".join(str(v) for v in row) for row in arr]
    with open(path, "w") as fh:
        fh.write(f"P1\n{width} {height}\n")
        fh.write("\n".join(lines))
        fh.write("\n")


def read_mask(path) -> np.ndarray:
    """Read a mask from PBM (P1) or PGM (P5); any nonzero sample is foreground."""
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == b"P1":
        return read_pbm(path)
    if magic == b"P5":
        return (read_pgm(path) != 0).astype(np.uint8)
    raise PnmError(f"{path}: unsupported magic {magic!r}, expected P1 or P5")


def read_image(path) -> np.ndarray:
    """Read a grayscale PGM as float64 in [0, 1]."""
    return read_pgm(path).astype(np.float64) / 255.0
