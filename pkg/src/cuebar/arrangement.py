"""Multi-barcode layouts: cue assignment, arrangement checks and structural attacks.

Cue rules: every block shows its 1-based counter (R1), every row end except the
last block adds a small dot (R2) and the last block adds a filled rectangle (R3).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Sequence

import numpy as np

from .barcode import RED, WHITE, BarcodeImage, lblock_coordinates
from .errors import BoundsError, RangeError
from .glyphs import DIGITS, DOT, RECT, SINGLE

Cue = tuple[str, ...]


class LayoutKind(str, Enum):
    TABLE = "TABLE"
    LINEAR = "LINEAR"
    SINGLE = "SINGLE"


@dataclass(frozen=True)
class ArrangementLayout:
    kind: LayoutKind
    rows: int = 1
    cols: int = 1
    length: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", LayoutKind(self.kind))
        if min(self.rows, self.cols, self.length) < 1:
            raise ValueError("layout dimensions must be positive")

    @classmethod
    def table(cls, rows: int, cols: int) -> "ArrangementLayout":
        return cls(LayoutKind.TABLE, rows=rows, cols=cols)

    @classmethod
    def linear(cls, length: int) -> "ArrangementLayout":
        return cls(LayoutKind.LINEAR, length=length)

    @classmethod
    def single(cls) -> "ArrangementLayout":
        return cls(LayoutKind.SINGLE)

    @classmethod
    def parse(cls, text: str) -> "ArrangementLayout":
        """`table:5x2`, `linear:3` or `single`."""
        t = text.strip().lower()
        if t == "single":
            return cls.single()
        m = re.fullmatch(r"table:(\d+)x(\d+)", t)
        if m:
            return cls.table(int(m.group(1)), int(m.group(2)))
        m = re.fullmatch(r"linear:(\d+)", t)
        if m:
            return cls.linear(int(m.group(1)))
        raise ValueError(f"bad layout {text!r}")

    @property
    def n_blocks(self) -> int:
        if self.kind is LayoutKind.TABLE:
            return self.rows * self.cols
        if self.kind is LayoutKind.LINEAR:
            return self.length
        return 1

    @property
    def row_length(self) -> int:
        return self.cols if self.kind is LayoutKind.TABLE else self.n_blocks

    def to_json(self) -> dict:
        d: dict[str, Any] = {"kind": self.kind.value}
        if self.kind is LayoutKind.TABLE:
            d.update(rows=self.rows, cols=self.cols)
        elif self.kind is LayoutKind.LINEAR:
            d["length"] = self.length
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ArrangementLayout":
        kind = LayoutKind(d["kind"].upper())
        if kind is LayoutKind.TABLE:
            return cls.table(int(d["rows"]), int(d["cols"]))
        if kind is LayoutKind.LINEAR:
            return cls.linear(int(d["length"]))
        return cls.single()


def cue_symbols_for(index: int, layout: ArrangementLayout) -> Cue:
    """Cue symbols of the block at 1-based position `index`."""
    n = layout.n_blocks
    if not 1 <= index <= n:
        raise RangeError(f"position {index} outside layout of {n} blocks")
    if n == 1:
        return (SINGLE,)
    syms = tuple(str(index))
    if index == n:
        return syms + (RECT,)
    if layout.kind is LayoutKind.TABLE and index % layout.cols == 0:
        return syms + (DOT,)
    return syms


def assign_cues(layout: ArrangementLayout) -> list[Cue]:
    return [cue_symbols_for(i, layout) for i in range(1, layout.n_blocks + 1)]


@dataclass(frozen=True)
class Violation:
    position: int  # 1-based block position where the check stops
    rule: str  # R1 | R2 | R3 | COUNT

    def to_json(self) -> dict:
        return {"status": "VIOLATION", "position": self.position, "rule": self.rule}


class _Ok:
    __slots__ = ()

    def __repr__(self) -> str:
        return "OK"

    def __bool__(self) -> bool:
        return True

    def to_json(self) -> dict:
        return {"status": "OK"}


OK = _Ok()


def _split(cue: Sequence[str]) -> tuple[str, tuple[str, ...]]:
    digits = "".join(s for s in cue if s in DIGITS)
    return digits, tuple(s for s in cue if s not in DIGITS)


def _classify(got: Sequence[str], want: Sequence[str]) -> str:
    gd, gm = _split(got)
    wd, wm = _split(want)
    if gd != wd or SINGLE in gm + wm:
        return "R1"
    if RECT in gm + wm:
        return "R3"
    if DOT in gm + wm:
        return "R2"
    return "R1"


def verify_arrangement(observed: Sequence[Sequence[str]], layout: ArrangementLayout):
    """OK when the observed cues equal the assignment, else the first Violation."""
    expected = assign_cues(layout)
    obs = [tuple(c) for c in observed]
    for k, (got, want) in enumerate(zip(obs, expected)):
        if got != want:
            return Violation(k + 1, _classify(got, want))
    if len(obs) < len(expected):
        # sequence stops early: the last shown block lacks the terminator
        return Violation(len(obs), "R3") if obs else Violation(1, "COUNT")
    if len(obs) > len(expected):
        return Violation(len(expected) + 1, "COUNT")
    return OK


class AttackKind(str, Enum):
    REARRANGE = "REARRANGE"
    ROW_DELETE = "ROW_DELETE"
    ROW_DUPLICATE = "ROW_DUPLICATE"
    CUE_FLIP = "CUE_FLIP"
    SUBSTITUTE = "SUBSTITUTE"
    CONTROL_POINT_TAMPER = "CONTROL_POINT_TAMPER"


@dataclass(frozen=True)
class AttackSpec:
    """Parameters are 0-based: block and row indices, pair indices of L-blocks."""

    kind: AttackKind
    perm: tuple[int, ...] = ()
    row: int = 0
    block: int = 0
    lblocks: tuple[int, ...] = ()
    offset: tuple[int, int] = (0, 0)
    replacement: Any = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", AttackKind(self.kind))
        object.__setattr__(self, "perm", tuple(int(p) for p in self.perm))
        object.__setattr__(self, "lblocks", tuple(int(p) for p in self.lblocks))
        object.__setattr__(self, "offset", tuple(int(o) for o in self.offset))

    def to_json(self) -> dict:
        d: dict[str, Any] = {"attack": self.kind.value}
        if self.kind is AttackKind.REARRANGE:
            d["perm"] = list(self.perm)
        elif self.kind in (AttackKind.ROW_DELETE, AttackKind.ROW_DUPLICATE):
            d["row"] = self.row
        elif self.kind is AttackKind.CUE_FLIP:
            d.update(block=self.block, lblocks=list(self.lblocks))
        elif self.kind is AttackKind.CONTROL_POINT_TAMPER:
            d.update(block=self.block, offset=list(self.offset))
        else:
            d["block"] = self.block
        return d

    @classmethod
    def from_json(cls, d: dict, replacement=None) -> "AttackSpec":
        return cls(AttackKind(d["attack"].upper()), perm=d.get("perm", ()), row=d.get("row", 0),
                   block=d.get("block", 0), lblocks=d.get("lblocks", ()),
                   offset=d.get("offset", (0, 0)), replacement=replacement)


def attack_order(n: int, attack: AttackSpec, layout: ArrangementLayout | None = None) -> list[int]:
    """Original 0-based indices, in order, of the blocks an attack leaves on screen."""
    k = attack.kind
    if k is AttackKind.REARRANGE:
        if sorted(attack.perm) != list(range(n)):
            raise BoundsError(f"perm {attack.perm} is not a permutation of {n} blocks")
        return list(attack.perm)
    if k in (AttackKind.ROW_DELETE, AttackKind.ROW_DUPLICATE):
        width = layout.row_length if layout else n
        nrows = -(-n // width)
        if not 0 <= attack.row < nrows:
            raise BoundsError(f"row {attack.row} outside {nrows} rows")
        row = list(range(attack.row * width, min(n, (attack.row + 1) * width)))
        if k is AttackKind.ROW_DELETE:
            return [i for i in range(n) if i not in row]
        end = row[-1] + 1
        return list(range(end)) + row + list(range(end, n))
    if not 0 <= attack.block < n:
        raise BoundsError(f"block {attack.block} outside {n} blocks")
    return list(range(n))


def flip_lblocks(img: BarcodeImage, pairs: Sequence[int]) -> BarcodeImage:
    """Complement every pixel of the listed L-blocks."""
    spec = img.spec
    if any(not 0 <= p < spec.n_pairs for p in pairs):
        raise BoundsError("L-block index outside barcode")
    out = img.copy()
    rows, cols = lblock_coordinates(spec.x, spec.y)
    s, b = spec.superpixel, spec.border
    for p in pairs:
        for r, c in zip(rows[p], cols[p]):
            cell = out.pixels[(b + r) * s:(b + r + 1) * s, (b + c) * s:(b + c + 1) * s]
            cell[...] = WHITE - cell
    return out


def shift_control_points(img: BarcodeImage, offset: tuple[int, int]) -> BarcodeImage:
    out = img.copy()
    red = out.pixels == RED
    out.pixels[red] = WHITE
    dr, dc = offset
    h, w = red.shape
    rr, cc = np.nonzero(red)
    rr, cc = rr + dr, cc + dc
    keep = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
    out.pixels[rr[keep], cc[keep]] = RED
    out.control_points = out.control_points + np.asarray(offset, dtype=float)
    return out


def apply_attack(blocks: Sequence, attack: AttackSpec, layout: ArrangementLayout | None = None) -> list:
    """Return the block sequence an attacker would display instead of `blocks`."""
    n = len(blocks)
    order = attack_order(n, attack, layout)
    out = [blocks[i] for i in order]
    k = attack.kind
    if k is AttackKind.CUE_FLIP:
        out[attack.block] = flip_lblocks(blocks[attack.block], attack.lblocks)
    elif k is AttackKind.CONTROL_POINT_TAMPER:
        out[attack.block] = shift_control_points(blocks[attack.block], attack.offset)
    elif k is AttackKind.SUBSTITUTE:
        if attack.replacement is None:
            raise ValueError("SUBSTITUTE needs a replacement image")
        out[attack.block] = attack.replacement
    return out


__all__ = [
    "ArrangementLayout", "AttackKind", "AttackSpec", "Cue", "LayoutKind", "OK", "Violation",
    "apply_attack", "assign_cues", "attack_order", "cue_symbols_for", "flip_lblocks",
    "shift_control_points", "verify_arrangement",
]
