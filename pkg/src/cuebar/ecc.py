"""(63,36,11) binary BCH code with bounded-distance decoding and a reject threshold.

Bit vectors are numpy uint8 arrays of 0/1.  Index 0 of a codeword is the
coefficient of x^62; the 36 data bits come first, the 27 parity bits last.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import FormatError, LengthError, RejectError

N = 63
K = 36
NPARITY = N - K
T_MAX = 5
DESIGN_DISTANCE = 11
PRIM_POLY = 0b1000011  # x^6 + x + 1
HEADER_BITS = 16


def _gf_tables():
    exp = np.zeros(2 * N, dtype=np.int64)
    log = np.zeros(N + 1, dtype=np.int64)
    x = 1
    for i in range(N):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x40:
            x ^= PRIM_POLY
    exp[N:] = exp[:N]
    return exp, log


GF_EXP, GF_LOG = _gf_tables()
GF_EXP.setflags(write=False)
GF_LOG.setflags(write=False)


def _gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return int(GF_EXP[GF_LOG[a] + GF_LOG[b]])


def minimal_polynomial(i: int) -> int:
    """Minimal polynomial of alpha^i over GF(2), as an int (bit k = coeff of x^k)."""
    coset = []
    j = i % N
    while j not in coset:
        coset.append(j)
        j = (2 * j) % N
    # multiply out prod (x - alpha^j) with GF(64) coefficients, low degree first
    poly = [1]
    for j in coset:
        root = int(GF_EXP[j])
        nxt = [0] * (len(poly) + 1)
        for k, c in enumerate(poly):
            nxt[k + 1] ^= c
            nxt[k] ^= _gf_mul(c, root)
        poly = nxt
    assert all(c in (0, 1) for c in poly)
    return sum(c << k for k, c in enumerate(poly))


def _gf2_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def gf2_mod(a: int, m: int) -> int:
    dm = m.bit_length() - 1
    while a and a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def generator_polynomial() -> int:
    """LCM of the minimal polynomials of alpha^1..alpha^10."""
    seen = []
    for i in range(1, 2 * T_MAX + 1):
        mp = minimal_polynomial(i)
        if mp not in seen:
            seen.append(mp)
    g = 1
    for mp in seen:
        g = _gf2_mul(g, mp)
    return g


GENERATOR = generator_polynomial()
assert GENERATOR.bit_length() - 1 == NPARITY


def _parity_matrix() -> np.ndarray:
    P = np.zeros((K, NPARITY), dtype=np.uint8)
    for i in range(K):
        # data bit i is the coefficient of x^(62-i) in the codeword
        rem = gf2_mod(1 << (N - 1 - i), GENERATOR)
        for k in range(NPARITY):
            P[i, k] = (rem >> (NPARITY - 1 - k)) & 1
    return P


PARITY_MATRIX = _parity_matrix()
PARITY_MATRIX.setflags(write=False)


@dataclass(frozen=True)
class EccPolicy:
    t_reject: int = 3

    def __post_init__(self):
        if not 0 <= self.t_reject <= T_MAX:
            raise ValueError(f"t_reject must be in [0, {T_MAX}]")


DEFAULT_POLICY = EccPolicy()


def as_bits(bits) -> np.ndarray:
    a = np.asarray(bits, dtype=np.uint8)
    if a.ndim != 1 or (a > 1).any():
        raise ValueError("expected a 1-D vector of 0/1 values")
    return a


def ecc_encode_blocks(data: np.ndarray) -> np.ndarray:
    """Systematic encoding of an (n, 36) batch."""
    data = np.asarray(data, dtype=np.uint8)
    parity = (data.astype(np.int64) @ PARITY_MATRIX) & 1
    return np.concatenate([data, parity.astype(np.uint8)], axis=1)


def ecc_encode_block(data) -> np.ndarray:
    d = as_bits(data)
    if d.size != K:
        raise LengthError(f"need exactly {K} data bits, got {d.size}")
    return ecc_encode_blocks(d[None, :])[0]


def ecc_decode_blocks(received: np.ndarray, policy: EccPolicy = DEFAULT_POLICY):
    """Decode an (n, 63) batch; raise RejectError naming the first bad block."""
    received = np.asarray(received, dtype=np.uint8)
    words, nerr = _kernels.decode_blocks(received, GF_EXP, GF_LOG)
    bad = np.flatnonzero((nerr < 0) | (nerr > policy.t_reject))
    if bad.size:
        i = int(bad[0])
        if nerr[i] < 0:
            raise RejectError(f"block {i}: uncorrectable", block=i)
        raise RejectError(f"block {i}: {int(nerr[i])} errors exceed t_reject={policy.t_reject}",
                          block=i, corrected=int(nerr[i]))
    return words[:, :K].copy(), nerr


def ecc_decode_block(received, policy: EccPolicy = DEFAULT_POLICY):
    r = as_bits(received)
    if r.size != N:
        raise LengthError(f"need exactly {N} bits, got {r.size}")
    data, nerr = ecc_decode_blocks(r[None, :], policy)
    return data[0], int(nerr[0])


def stream_length(n_bits: int) -> int:
    return N * -(-(HEADER_BITS + n_bits) // K)


def ecc_encode_stream(bits) -> np.ndarray:
    b = as_bits(bits)
    if b.size >= 1 << HEADER_BITS:
        raise LengthError(f"stream of {b.size} bits exceeds the 16-bit length header")
    header = np.array([(b.size >> (HEADER_BITS - 1 - i)) & 1 for i in range(HEADER_BITS)], dtype=np.uint8)
    body = np.concatenate([header, b])
    nblocks = -(-body.size // K)
    padded = np.zeros(nblocks * K, dtype=np.uint8)
    padded[: body.size] = body
    return ecc_encode_blocks(padded.reshape(nblocks, K)).reshape(-1)


def ecc_decode_stream(bits, policy: EccPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Inverse of :func:`ecc_encode_stream`.

    Trailing all-zero codewords beyond the encoded stream are accepted (they
    are the fill used when a stream is placed in a larger barcode); any
    non-zero fill after the payload is treated as a rejected decode.
    """
    b = as_bits(bits)
    if b.size == 0 or b.size % N:
        raise FormatError(f"stream length {b.size} is not a positive multiple of {N}")
    data, _ = ecc_decode_blocks(b.reshape(-1, N), policy)
    flat = data.reshape(-1)
    length = int("".join(map(str, flat[:HEADER_BITS])), 2)
    if HEADER_BITS + length > flat.size:
        raise FormatError(f"length header {length} exceeds the {flat.size - HEADER_BITS} available bits")
    fill = flat[HEADER_BITS + length:]
    if fill.any():
        first = (HEADER_BITS + length + int(np.argmax(fill))) // K
        raise RejectError(f"non-zero fill in block {first}", block=first)
    return flat[HEADER_BITS:HEADER_BITS + length].copy()
