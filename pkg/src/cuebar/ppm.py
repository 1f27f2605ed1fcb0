"""Binary PPM (P6) reading and writing, with optional PNG export."""
from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .errors import FormatError

_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n)*(\S+)")


def encode_ppm(rgb: np.ndarray) -> bytes:
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise FormatError(f"need an HxWx3 array, got {rgb.shape}")
    h, w, _ = rgb.shape
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(rgb, dtype=np.uint8).tobytes()


def decode_ppm(data: bytes) -> np.ndarray:
    pos = 0
    fields = []
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if not m:
            raise FormatError("truncated PPM header")
        fields.append(m.group(1))
        pos = m.end()
    if fields[0] != b"P6":
        raise FormatError(f"not a binary PPM (magic {fields[0]!r})")
    try:
        w, h, maxval = (int(f) for f in fields[1:])
    except ValueError as exc:
        raise FormatError("bad PPM header") from exc
    if maxval != 255:
        raise FormatError("only 8-bit PPM (maxval 255) is supported")
    pos += 1  # single whitespace byte after maxval
    body = data[pos:pos + w * h * 3]
    if len(body) != w * h * 3:
        raise FormatError("truncated PPM raster")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3).copy()


def write_ppm(path, rgb: np.ndarray) -> None:
    Path(path).write_bytes(encode_ppm(rgb))


def read_ppm(path) -> np.ndarray:
    return decode_ppm(Path(path).read_bytes())


def write_png(path, rgb: np.ndarray) -> None:
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover
        raise RuntimeError("PNG export needs Pillow (pip install cuebar[png])") from exc
    Image.fromarray(np.asarray(rgb, dtype=np.uint8)).save(path)
