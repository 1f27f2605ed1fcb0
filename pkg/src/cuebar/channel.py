"""Synthetic display-to-camera channel: warp, colour jitter, superpixel flips."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .barcode import PALETTE, BarcodeImage, BarcodeSpec, as_labels, interior_matrix, labels_from_rgb
from .errors import FormatError
from .registration import AffineTransform, rectify


@dataclass(frozen=True)
class ChannelModel:
    flip_prob: float = 0.0
    warp: AffineTransform = field(default_factory=AffineTransform)
    color_jitter: int = 0
    seed: int = 0
    superpixel: int = 2  # flip-cell edge in output pixels
    capture_shape: tuple[int, int] | None = None  # None keeps the input size

    def __post_init__(self):
        if not 0.0 <= self.flip_prob <= 1.0:
            raise ValueError("flip_prob must lie in [0, 1]")
        if not 0 <= self.color_jitter <= 255:
            raise ValueError("color_jitter must lie in [0, 255]")
        if not self.warp.is_valid():
            raise ValueError("warp is singular")
        if self.superpixel < 1:
            raise ValueError("superpixel must be >= 1")

    @property
    def is_identity(self) -> bool:
        return (self.flip_prob == 0 and self.color_jitter == 0 and self.capture_shape is None
                and np.allclose(self.warp.matrix, AffineTransform().matrix))


def to_rgb(raster) -> np.ndarray:
    if isinstance(raster, BarcodeImage):
        return raster.rgb()
    a = np.asarray(raster)
    if a.ndim == 2:
        return PALETTE[a]
    if a.ndim == 3 and a.shape[2] == 3:
        return a.astype(np.uint8, copy=False)
    raise FormatError(f"unsupported raster shape {a.shape}")


def flip_mask(shape: tuple[int, int], cell: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Pixel mask of whole cell-aligned squares selected independently with probability p."""
    ch, cw = -(-shape[0] // cell), -(-shape[1] // cell)
    cells = rng.random((ch, cw)) < p
    return np.repeat(np.repeat(cells, cell, axis=0), cell, axis=1)[: shape[0], : shape[1]]


def transmit(raster, model: ChannelModel) -> np.ndarray:
    """Push a raster through the channel; returns an RGB uint8 capture.

    Identical (raster, model) pairs give identical captures.
    """
    rgb = to_rgb(raster)
    if model.is_identity:
        return rgb.copy()
    rng = np.random.default_rng(model.seed)
    out_shape = model.capture_shape or rgb.shape[:2]
    out = rectify(rgb, model.warp, out_shape, fill=0)
    if model.color_jitter:
        j = model.color_jitter
        noise = rng.integers(-j, j + 1, size=out.shape, dtype=np.int16)
        out = np.clip(out.astype(np.int16) + noise, 0, 255).astype(np.uint8)
    if model.flip_prob:
        mask = flip_mask(out.shape[:2], model.superpixel, model.flip_prob, rng)
        # control dots stay red: only the binary value of data pixels is inverted
        mask &= labels_from_rgb(out) != 2
        out[mask] = 255 - out[mask]
    return out


def measure_superpixel_error(original: np.ndarray, received, spec: BarcodeSpec) -> float:
    """Fraction of interior barcode pixels whose majority value disagrees with `original`."""
    original = np.asarray(original)
    if original.shape != spec.interior_shape:
        raise FormatError(f"original is {original.shape}, expected {spec.interior_shape}")
    got = interior_matrix(as_labels(received), spec)
    return float(np.mean(got != original))
