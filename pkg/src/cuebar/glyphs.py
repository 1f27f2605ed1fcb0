"""Visual-cue glyphs, cue rendering and cue reading."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import FitError, FormatError

DOT = "DOT"
RECT = "RECT"
SINGLE = "SINGLE"
DIGITS = tuple("0123456789")
SYMBOLS = DIGITS + (DOT, RECT, SINGLE)
UNKNOWN = "?"
# a forger must flip at least this many cue pixels to turn one digit into another
MIN_DIGIT_DISTANCE = 14


@dataclass(frozen=True)
class GlyphSet:
    symbols: dict

    def __post_init__(self):
        shapes = {np.asarray(b).shape for b in self.symbols.values()}
        if len(shapes) != 1:
            raise ValueError("all glyphs must share one cell size")

    @property
    def cell(self) -> tuple[int, int]:
        return next(iter(self.symbols.values())).shape

    def __getitem__(self, sym):
        return self.symbols[sym]

    def to_text(self) -> str:
        out = []
        for name, bm in self.symbols.items():
            out.append(f"= {name}")
            out.extend("".join("#" if p else "." for p in row) for row in bm)
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GlyphSet":
        symbols, name, rows = {}, None, []

        def flush():
            if name is not None:
                if not rows:
                    raise FormatError(f"glyph {name} has no rows")
                symbols[name] = np.array([[ch == "#" for ch in r] for r in rows], dtype=np.uint8)

        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith(";"):
                continue
            if line.startswith("="):
                flush()
                name, rows = line[1:].strip(), []
            else:
                if name is None or set(line) - {"#", "."}:
                    raise FormatError(f"bad glyph line {raw!r}")
                rows.append(line)
        flush()
        if len({len(r) for b in symbols.values() for r in b}) > 1:
            raise FormatError("ragged glyph rows")
        for b in symbols.values():
            b.setflags(write=False)
        return cls(symbols)

    @classmethod
    def load(cls, path) -> "GlyphSet":
        return cls.from_text(Path(path).read_text())


def default_glyphs() -> GlyphSet:
    global _DEFAULT
    if _DEFAULT is None:
        g = GlyphSet.from_text(resources.files("cuebar").joinpath("data/glyphs.txt").read_text())
        d = min_pairwise_distance(g)
        if d < MIN_DIGIT_DISTANCE:
            raise FormatError(f"shipped digits are only {d} pixels apart, need {MIN_DIGIT_DISTANCE}")
        _DEFAULT = g
    return _DEFAULT


_DEFAULT = None


@dataclass(frozen=True)
class CueImage:
    bitmap: np.ndarray

    @property
    def shape(self):
        return self.bitmap.shape


def min_pairwise_distance(g: GlyphSet, symbols: Sequence[str] = DIGITS, with_pair=False):
    """Minimum Hamming distance over unordered pairs of the given symbols."""
    present = [s for s in symbols if s in g.symbols]
    if len(present) < 2:
        raise ValueError("need at least two glyphs")
    best = None
    for a, b in itertools.combinations(present, 2):
        d = int(np.count_nonzero(g[a] != g[b]))
        if best is None or d < best[0]:
            best = (d, (a, b))
    return best if with_pair else best[0]


def render_cue(symbols: Sequence[str], target: tuple[int, int], glyphs: GlyphSet | None = None) -> CueImage:
    glyphs = glyphs or default_glyphs()
    rows, cols = target
    ch, cw = glyphs.cell
    out = np.zeros((rows, cols), dtype=np.uint8)
    if not symbols:
        return CueImage(out)
    need = len(symbols) * (cw + 1) - 1
    if need > cols or ch > rows:
        raise FitError(f"{len(symbols)} symbols need {ch}x{need} cue pixels, have {rows}x{cols}")
    for i, s in enumerate(symbols):
        out[:ch, i * (cw + 1): i * (cw + 1) + cw] = glyphs[s]
    return CueImage(out)


def read_cue(cue: CueImage | np.ndarray, glyphs: GlyphSet | None = None) -> list[str]:
    """Read symbols back from a cue bitmap by exact glyph match, as an attentive user would.

    Cells that match no glyph read as ``"?"``; stray pixels outside the glyph
    cells append a ``"?"`` as well.
    """
    glyphs = glyphs or default_glyphs()
    bm = cue.bitmap if isinstance(cue, CueImage) else np.asarray(cue)
    ch, cw = glyphs.cell
    rows, cols = bm.shape
    if ch > rows:
        return [UNKNOWN] if bm.any() else []
    lookup = {g.tobytes(): name for name, g in glyphs.symbols.items()}
    seen = np.zeros_like(bm, dtype=bool)
    out = []
    for i in range(cols // (cw + 1) + 1):
        c0 = i * (cw + 1)
        if c0 + cw > cols:
            break
        cell = np.ascontiguousarray(bm[:ch, c0:c0 + cw])
        if not cell.any():
            break
        seen[:ch, c0:c0 + cw] = True
        out.append(lookup.get(cell.astype(np.uint8).tobytes(), UNKNOWN))
    if bm[~seen].any():
        out.append(UNKNOWN)
    return out
