"""Barcode assembly: protect -> ECC -> L-block cue embedding -> control points -> raster."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import ecc
from .ecc import DEFAULT_POLICY, EccPolicy
from .errors import AuthError, CapacityError, DecodeError, FormatError, RejectError
from .glyphs import CueImage, GlyphSet, render_cue
from .keys import SessionKey, derive_codebook
from .payload import OVERHEAD_BYTES, ProtectedPayload, protect, unprotect

BLACK, WHITE, RED = 0, 1, 2
PALETTE = np.array([[0, 0, 0], [255, 255, 255], [255, 0, 0]], dtype=np.uint8)
CONTROL_STEP = 8
MIN_POINTS_PER_EDGE = 4


@dataclass(frozen=True)
class BarcodeSpec:
    x: int = 60
    y: int = 42
    superpixel: int = 2
    border: int = 4

    def __post_init__(self):
        if self.x <= 0 or self.x % 2:
            raise ValueError("x must be a positive even number")
        # two L-blocks share each 3x2 tiling cell, so rows hold y/2 cells
        if self.y <= 0 or self.y % 2:
            raise ValueError("y must be a positive even number")
        if self.x * self.y < ecc.N:
            raise ValueError("x*y must hold at least one codeword")
        if self.superpixel < 1 or self.border < 1:
            raise ValueError("superpixel and border must be >= 1")

    @classmethod
    def parse(cls, text: str, **kw) -> "BarcodeSpec":
        m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
        if not m:
            raise ValueError(f"spec must look like 60x42, got {text!r}")
        return cls(int(m.group(1)), int(m.group(2)), **kw)

    def as_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "superpixel": self.superpixel, "border": self.border}

    @property
    def n_bits(self) -> int:
        return self.x * self.y

    @property
    def n_pairs(self) -> int:
        return self.n_bits // 2

    @property
    def n_codewords(self) -> int:
        return self.n_bits // ecc.N

    @property
    def cue_shape(self) -> tuple[int, int]:
        return self.x // 2, self.y

    @property
    def interior_shape(self) -> tuple[int, int]:
        """Interior size in barcode pixels."""
        return 3 * self.x // 2, self.y

    @property
    def grid_shape(self) -> tuple[int, int]:
        """Full size (with border) in barcode pixels."""
        h, w = self.interior_shape
        return h + 2 * self.border, w + 2 * self.border

    @property
    def display_shape(self) -> tuple[int, int]:
        h, w = self.grid_shape
        return h * self.superpixel, w * self.superpixel

    @property
    def interior_display_shape(self) -> tuple[int, int]:
        h, w = self.interior_shape
        return h * self.superpixel, w * self.superpixel

    @property
    def max_message_bytes(self) -> int:
        data_bits = self.n_codewords * ecc.K - ecc.HEADER_BITS
        return max(0, data_bits // 8 - OVERHEAD_BYTES)


@lru_cache(maxsize=32)
def lblock_coordinates(x: int, y: int) -> tuple[np.ndarray, np.ndarray]:
    """(n_pairs, 3) row and column indices of each L-block's pixels p1, p2, p3.

    Pair i sits in 3x2 cell i//2 (row-major, y/2 cells per row): block A
    {(r,c), (r,c+1), (r+1,c)} for even i, block B {(r+1,c+1), (r+2,c), (r+2,c+1)}
    for odd i.
    """
    i = np.arange(x * y // 2)
    cell = i // 2
    r0 = 3 * (cell // (y // 2))
    c0 = 2 * (cell % (y // 2))
    odd = (i % 2).astype(bool)
    dr = np.where(odd[:, None], [1, 2, 2], [0, 0, 1])
    dc = np.where(odd[:, None], [1, 0, 1], [0, 1, 0])
    rows, cols = r0[:, None] + dr, c0[:, None] + dc
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


def _edge_positions(lo: int, hi: int) -> np.ndarray:
    n = max(MIN_POINTS_PER_EDGE, (hi - lo) // CONTROL_STEP + 1)
    return np.round(np.linspace(lo, hi, n)).astype(int)


@lru_cache(maxsize=32)
def _control_grid_points(spec: BarcodeSpec) -> np.ndarray:
    H, W = spec.grid_shape
    b = spec.border // 2
    top, bottom, left, right = b, H - 1 - b, b, W - 1 - b
    cols = _edge_positions(left, right)
    rows = _edge_positions(top, bottom)
    pts = [(top, c) for c in cols]
    pts += [(r, right) for r in rows[1:]]
    pts += [(bottom, c) for c in cols[::-1][1:]]
    pts += [(r, left) for r in rows[::-1][1:-1]]
    out = np.array(pts, dtype=int)
    out.setflags(write=False)
    return out


def control_points(spec: BarcodeSpec) -> np.ndarray:
    """Reference control-point centroids in display pixels, in border-walk order."""
    s = spec.superpixel
    return _control_grid_points(spec) * s + (s - 1) / 2.0


@dataclass
class BarcodeImage:
    pixels: np.ndarray  # display-resolution labels: BLACK / WHITE / RED
    spec: BarcodeSpec
    control_points: np.ndarray = field(repr=False)

    def rgb(self) -> np.ndarray:
        return PALETTE[self.pixels]

    def copy(self) -> "BarcodeImage":
        return BarcodeImage(self.pixels.copy(), self.spec, self.control_points.copy())


def capacity(display_pixels: int) -> int:
    """Idealized payload bits for an area of display pixels.

    Counts only the 2x2 superpixel, L-block (2 of 3) and BCH (36/63) rates;
    border, length header, nonce and tag overhead are ignored.
    """
    if display_pixels < 0:
        raise ValueError("display_pixels must be >= 0")
    return int(Fraction(display_pixels) * Fraction(1, 4) * Fraction(2, 3) * Fraction(36, 63))


def bytes_to_bits(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))


def bits_to_bytes(bits: np.ndarray) -> bytes:
    if bits.size % 8:
        raise FormatError("bit count is not a multiple of 8")
    return np.packbits(bits).tobytes()


def message_bits(m: bytes, key: SessionKey, nonce: bytes, spec: BarcodeSpec) -> np.ndarray:
    """m_1: the protected, ECC-encoded message zero-filled to x*y bits."""
    stream = ecc.ecc_encode_stream(bytes_to_bits(protect(m, key, nonce).to_bytes()))
    if stream.size > spec.n_bits:
        raise CapacityError(f"{len(m)}-byte message needs {stream.size} bits, barcode holds {spec.n_bits}"
                            f" (max message {spec.max_message_bytes} bytes)")
    out = np.zeros(spec.n_bits, dtype=np.uint8)
    out[: stream.size] = stream
    return out


def embed(m1: np.ndarray, cue: np.ndarray, codebook, spec: BarcodeSpec) -> np.ndarray:
    """Tile L-blocks into the interior binary matrix (barcode pixels)."""
    pairs = m1.reshape(-1, 2)
    pair_vals = (pairs[:, 0] << 1) | pairs[:, 1]
    patterns = codebook.encode_table[cue.reshape(-1), pair_vals]
    rows, cols = lblock_coordinates(spec.x, spec.y)
    interior = np.zeros(spec.interior_shape, dtype=np.uint8)
    for k, shift in enumerate((2, 1, 0)):
        interior[rows[:, k], cols[:, k]] = (patterns >> shift) & 1
    return interior


def render(interior: np.ndarray, spec: BarcodeSpec) -> BarcodeImage:
    grid = np.full(spec.grid_shape, WHITE, dtype=np.uint8)
    b = spec.border
    grid[b:b + interior.shape[0], b:b + interior.shape[1]] = interior
    pts = _control_grid_points(spec)
    grid[pts[:, 0], pts[:, 1]] = RED
    s = spec.superpixel
    pixels = np.repeat(np.repeat(grid, s, axis=0), s, axis=1)
    return BarcodeImage(pixels, spec, control_points(spec))


def encode_barcode(key: SessionKey, m: bytes, symbols: Sequence[str], spec: BarcodeSpec,
                   nonce: bytes, glyphs: GlyphSet | None = None) -> BarcodeImage:
    m1 = message_bits(m, key, nonce, spec)
    cue = render_cue(symbols, spec.cue_shape, glyphs).bitmap
    return render(embed(m1, cue, derive_codebook(key.k_V), spec), spec)


def labels_from_rgb(rgb: np.ndarray) -> np.ndarray:
    rgb = np.asarray(rgb)
    r, g, b = (rgb[..., k].astype(np.int32) for k in range(3))
    red = (r >= 200) & (g <= 80) & (b <= 80)
    lum = (299 * r + 587 * g + 114 * b) // 1000
    out = (lum >= 128).astype(np.uint8)
    out[red] = RED
    return out


def as_labels(raster) -> np.ndarray:
    if isinstance(raster, BarcodeImage):
        return raster.pixels
    a = np.asarray(raster)
    if a.ndim == 3 and a.shape[2] == 3:
        return labels_from_rgb(a)
    if a.ndim == 2:
        return a.astype(np.uint8)
    raise FormatError(f"unsupported raster shape {a.shape}")


def read_superpixels(raster, spec: BarcodeSpec) -> np.ndarray:
    """Collapse each superpixel to the majority of its non-RED pixels (ties -> BLACK)."""
    lab = as_labels(raster)
    s = spec.superpixel
    h, w = lab.shape
    if h % s or w % s:
        raise FormatError(f"raster {h}x{w} is not a whole number of {s}x{s} superpixels")
    # vote = #white - #black over the s*s phases; strided slices beat a 4-D reduction
    vote = np.zeros((h // s, w // s), dtype=np.int16)
    for i in range(s):
        for j in range(s):
            sub = lab[i::s, j::s]
            vote += (sub == WHITE)
            vote -= (sub == BLACK)
    return (vote > 0).astype(np.uint8)


def interior_matrix(raster, spec: BarcodeSpec) -> np.ndarray:
    """Interior barcode-pixel matrix from a full or interior-only raster."""
    lab = as_labels(raster)
    if lab.shape == spec.display_shape:
        o = spec.border * spec.superpixel
        h, w = spec.interior_display_shape
        lab = lab[o:o + h, o:o + w]
    elif lab.shape != spec.interior_display_shape:
        raise FormatError(f"raster {lab.shape} matches neither {spec.display_shape} nor "
                          f"{spec.interior_display_shape}")
    return read_superpixels(lab, spec)


def extract_patterns(interior: np.ndarray, spec: BarcodeSpec) -> np.ndarray:
    rows, cols = lblock_coordinates(spec.x, spec.y)
    px = interior[rows, cols].astype(np.uint8)
    return (px[:, 0] << 2) | (px[:, 1] << 1) | px[:, 2]


def observe_cue(raster, spec: BarcodeSpec | None = None) -> CueImage:
    """The cue as anyone looking at the barcode sees it: L-block brightness, no key."""
    spec = spec or raster.spec
    pats = extract_patterns(interior_matrix(raster, spec), spec)
    weight = ((pats >> 2) & 1) + ((pats >> 1) & 1) + (pats & 1)
    return CueImage((weight >= 2).astype(np.uint8).reshape(spec.cue_shape))


def recover_bits(raster, codebook, spec: BarcodeSpec) -> tuple[np.ndarray, CueImage]:
    pats = extract_patterns(interior_matrix(raster, spec), spec)
    pairs = codebook.decode_table[pats]
    bits = np.stack([(pairs >> 1) & 1, pairs & 1], axis=1).reshape(-1).astype(np.uint8)
    weight = ((pats >> 2) & 1) + ((pats >> 1) & 1) + (pats & 1)
    return bits, CueImage((weight >= 2).astype(np.uint8).reshape(spec.cue_shape))


def decode_bits(m1: np.ndarray, spec: BarcodeSpec, policy: EccPolicy = DEFAULT_POLICY) -> ProtectedPayload:
    nb = spec.n_codewords
    used = nb * ecc.N
    leftover = m1[used:]
    # bits past the last whole codeword carry zeros; count ones as errors
    if int(leftover.sum()) > policy.t_reject:
        raise RejectError(f"{int(leftover.sum())} errors in trailing fill", block=nb)
    try:
        payload_bits = ecc.ecc_decode_stream(m1[:used], policy)
        return ProtectedPayload.from_bytes(bits_to_bytes(payload_bits))
    except (FormatError, DecodeError) as exc:
        # the code accepted the bits but their framing is garbage: treat as forged
        raise AuthError(f"payload framing invalid: {exc}") from exc


def decode_barcode(img, key: SessionKey, policy: EccPolicy = DEFAULT_POLICY,
                   spec: BarcodeSpec | None = None) -> tuple[bytes, CueImage]:
    """Recover (message, observed cue) from a registered barcode raster.

    Raises RejectError when the ECC policy refuses the block, AuthError when
    the MAC fails, FormatError on a geometry mismatch.
    """
    if spec is None:
        if not isinstance(img, BarcodeImage):
            raise FormatError("a raw raster needs an explicit BarcodeSpec")
        spec = img.spec
    m1, cue = recover_bits(img, derive_codebook(key.k_V), spec)
    return unprotect(decode_bits(m1, spec, policy), key), cue
