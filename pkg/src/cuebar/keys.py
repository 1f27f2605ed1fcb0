"""Session keys and the secret L-block codebook derived from k_V."""
from __future__ import annotations

import hashlib
import hmac
import itertools
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

KEY_BYTES = 16

# 3-bit patterns p1p2p3 (p1 is the MSB), sorted ascending
W_GROUP = (0b011, 0b101, 0b110, 0b111)
B_GROUP = (0b000, 0b001, 0b010, 0b100)

_PERMS = tuple(itertools.permutations(range(4)))  # lexicographic order
N_CODEBOOKS = len(_PERMS) ** 2


@dataclass(frozen=True)
class SessionKey:
    k_T: bytes
    k_E: bytes
    k_V: bytes

    def __post_init__(self):
        for name in ("k_T", "k_E", "k_V"):
            v = getattr(self, name)
            if not isinstance(v, (bytes, bytearray)) or len(v) != KEY_BYTES:
                raise ValueError(f"{name} must be {KEY_BYTES} bytes")
            object.__setattr__(self, name, bytes(v))

    def to_text(self) -> str:
        return "".join(k.hex() + "\n" for k in (self.k_T, self.k_E, self.k_V))

    @classmethod
    def from_text(cls, text: str) -> "SessionKey":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if len(lines) != 3 or any(len(ln) != 2 * KEY_BYTES for ln in lines):
            raise ValueError("key file must hold three 32-hex-digit lines")
        return cls(*(bytes.fromhex(ln) for ln in lines))


def save_key(key: SessionKey, path) -> None:
    Path(path).write_text(key.to_text())


def load_key(path) -> SessionKey:
    return SessionKey.from_text(Path(path).read_text())


def keygen(seed: int) -> SessionKey:
    """Deterministic session key for a 64-bit seed (test fixtures, simulation)."""
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    material = hashlib.shake_256(b"cuebar/keygen/" + seed.to_bytes(8, "big")).digest(3 * KEY_BYTES)
    return SessionKey(material[:16], material[16:32], material[32:])


@dataclass(frozen=True)
class LBlockCodebook:
    """Bijections from bit pairs (0..3, first bit as MSB) onto the W and B groups.

    ``pi_W[b]`` is the 3-bit pixel pattern emitted for bit pair ``b`` when the
    cue pixel is white, ``pi_B[b]`` when it is black.
    """

    pi_W: tuple[int, int, int, int]
    pi_B: tuple[int, int, int, int]

    def __post_init__(self):
        if sorted(self.pi_W) != list(W_GROUP) or sorted(self.pi_B) != list(B_GROUP):
            raise ValueError("pi_W / pi_B must be bijections onto W / B")

    @property
    def index(self) -> int:
        lw = _PERMS.index(tuple(W_GROUP.index(p) for p in self.pi_W))
        lb = _PERMS.index(tuple(B_GROUP.index(p) for p in self.pi_B))
        return 24 * lw + lb

    @classmethod
    def from_index(cls, index: int) -> "LBlockCodebook":
        return _codebook_from_index(index)

    @property
    def encode_table(self) -> np.ndarray:
        """(2, 4) array: [cue bit, bit pair] -> pattern."""
        return np.array([self.pi_B, self.pi_W], dtype=np.uint8)

    @property
    def decode_table(self) -> np.ndarray:
        """(8,) array: pattern -> bit pair.  The cue bit is the pattern weight >= 2."""
        t = np.zeros(8, dtype=np.uint8)
        for b in range(4):
            t[self.pi_W[b]] = b
            t[self.pi_B[b]] = b
        return t


@lru_cache(maxsize=None)
def _codebook_from_index(index: int) -> LBlockCodebook:
    if not 0 <= index < N_CODEBOOKS:
        raise ValueError(f"codebook index must be in [0, {N_CODEBOOKS})")
    pw, pb = _PERMS[index // 24], _PERMS[index % 24]
    return LBlockCodebook(tuple(W_GROUP[i] for i in pw), tuple(B_GROUP[i] for i in pb))


def all_codebooks() -> list[LBlockCodebook]:
    return [LBlockCodebook.from_index(i) for i in range(N_CODEBOOKS)]


def codebook_index_for(k_V: bytes) -> int:
    prf = hmac.new(k_V, b"codebook", hashlib.sha1).digest()
    return int.from_bytes(prf[:4], "big") % N_CODEBOOKS


def derive_codebook(k_V: bytes) -> LBlockCodebook:
    return LBlockCodebook.from_index(codebook_index_for(k_V))
