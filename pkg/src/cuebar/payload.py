"""Encrypt-then-MAC protection (AES-128-CTR + HMAC-SHA1) and Base32 transcription."""
from __future__ import annotations

import base64
import binascii
import hashlib
import hmac
import math
from dataclasses import dataclass

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .errors import AuthError, DecodeError
from .keys import SessionKey

NONCE_BYTES = 16
TAG_BYTES = 20
OVERHEAD_BYTES = NONCE_BYTES + TAG_BYTES

_B32_ALPHABET = set("ABCDEFGHIJKLMNOPQRSTUVWXYZ234567")
# unpadded Base32 lengths mod 8 that can occur
_B32_VALID_REM = {0, 2, 4, 5, 7}


@dataclass(frozen=True)
class ProtectedPayload:
    nonce: bytes
    ciphertext: bytes
    tag: bytes

    def to_bytes(self) -> bytes:
        return self.nonce + self.ciphertext + self.tag

    @classmethod
    def from_bytes(cls, data: bytes) -> "ProtectedPayload":
        if len(data) < OVERHEAD_BYTES:
            raise DecodeError(f"payload needs at least {OVERHEAD_BYTES} bytes, got {len(data)}")
        return cls(data[:NONCE_BYTES], data[NONCE_BYTES:-TAG_BYTES], data[-TAG_BYTES:])


def _ctr(key: bytes, nonce: bytes, data: bytes) -> bytes:
    enc = Cipher(algorithms.AES(key), modes.CTR(nonce)).encryptor()
    return enc.update(data) + enc.finalize()


def _mac(k_T: bytes, nonce: bytes, ciphertext: bytes) -> bytes:
    return hmac.new(k_T, nonce + ciphertext, hashlib.sha1).digest()


def protect(m: bytes, key: SessionKey, nonce: bytes) -> ProtectedPayload:
    if len(nonce) != NONCE_BYTES:
        raise ValueError("nonce must be 16 bytes")
    ct = _ctr(key.k_E, nonce, bytes(m))
    return ProtectedPayload(bytes(nonce), ct, _mac(key.k_T, nonce, ct))


def unprotect(p: ProtectedPayload, key: SessionKey) -> bytes:
    """Verify the tag, then decrypt.  Nothing is decrypted for a bad tag."""
    if len(p.nonce) != NONCE_BYTES or len(p.tag) != TAG_BYTES:
        raise AuthError("malformed payload")
    if not hmac.compare_digest(_mac(key.k_T, p.nonce, p.ciphertext), p.tag):
        raise AuthError("MAC verification failed")
    return _ctr(key.k_E, p.nonce, p.ciphertext)


def b32_encode(data: bytes) -> str:
    return base64.b32encode(data).decode("ascii").rstrip("=")


def b32_decode(text: str) -> bytes:
    t = "".join(text.split()).upper()
    if any(ch not in _B32_ALPHABET for ch in t):
        raise DecodeError("character outside the Base32 alphabet")
    if len(t) % 8 not in _B32_VALID_REM:
        raise DecodeError(f"impossible Base32 length {len(t)}")
    try:
        return base64.b32decode(t + "=" * (-len(t) % 8))
    except binascii.Error as exc:
        raise DecodeError(str(exc)) from exc


def readable_length(n_bytes: int) -> int:
    return math.ceil(8 * n_bytes / 5)


def to_readable(p: ProtectedPayload) -> str:
    return b32_encode(p.to_bytes())


def from_readable(t: str) -> ProtectedPayload:
    return ProtectedPayload.from_bytes(b32_decode(t))
