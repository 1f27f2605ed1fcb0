"""L-block codec: two payload bits plus one cue bit in three binary pixels."""
from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from .keys import B_GROUP, W_GROUP, LBlockCodebook, all_codebooks


class LBlock(NamedTuple):
    p1: int
    p2: int
    p3: int

    @classmethod
    def from_pattern(cls, pattern: int) -> "LBlock":
        return cls((pattern >> 2) & 1, (pattern >> 1) & 1, pattern & 1)

    @property
    def pattern(self) -> int:
        return (self.p1 << 2) | (self.p2 << 1) | self.p3

    @property
    def weight(self) -> int:
        return self.p1 + self.p2 + self.p3

    @property
    def is_white(self) -> bool:
        return self.weight >= 2

    def complement(self) -> "LBlock":
        return LBlock(1 - self.p1, 1 - self.p2, 1 - self.p3)


def pair_from_str(s: str) -> int:
    if len(s) != 2 or set(s) - {"0", "1"}:
        raise ValueError(f"bad bit pair {s!r}")
    return int(s, 2)


def encode_pair(b: int, v: int, cb: LBlockCodebook) -> LBlock:
    if not 0 <= b < 4 or v not in (0, 1):
        raise ValueError("bit pair must be in 0..3 and cue bit in {0, 1}")
    return LBlock.from_pattern(cb.pi_W[b] if v else cb.pi_B[b])


def decode_pair(blk: LBlock, cb: LBlockCodebook) -> tuple[int, int]:
    p = blk.pattern
    if blk.is_white:
        return cb.pi_W.index(p), 1
    return cb.pi_B.index(p), 0


def brightness_flip_miss_rate(codebooks=None, *, same_group=False, attacker_knows_codebook=False) -> Fraction:
    """Exact probability that a replaced block still decodes to the original bit pair.

    The attacker swaps an encoded block for one drawn uniformly from the
    opposite group (or, with ``same_group``, from its own group).  An
    attacker holding the codebook instead picks the block that encodes the
    same pair.  Enumerates every codebook, bit pair, cue bit and choice.
    """
    if codebooks is None:
        codebooks = all_codebooks()
    hits = total = 0
    for cb in codebooks:
        for b in range(4):
            for v in (0, 1):
                target_v = v if same_group else 1 - v
                if attacker_knows_codebook:
                    choices = [encode_pair(b, target_v, cb)]
                else:
                    choices = [LBlock.from_pattern(p) for p in (W_GROUP if target_v else B_GROUP)]
                for blk in choices:
                    got, _ = decode_pair(blk, cb)
                    hits += got == b
                    total += 1
    return Fraction(hits, total)
