"""Hot loops: BCH syndrome/Berlekamp-Massey/Chien decoding and nearest-neighbour warping.

Each kernel has a numba ``@njit`` path and a pure-numpy fallback.  The numba
path is used when numba imports and ``CUEBAR_NO_NUMBA`` is unset (or ``0``).
Both paths are importable directly for benchmarks and cross-checks.
"""
from __future__ import annotations

import os

import numpy as np

N = 63
K = 36
T_MAX = 5
_TWO_T = 2 * T_MAX


def _want_numba() -> bool:
    if os.environ.get("CUEBAR_NO_NUMBA", "0") not in ("", "0"):
        return False
    import importlib.util

    return importlib.util.find_spec("numba") is not None


USE_NUMBA = _want_numba()


def _load_python_loops():
    import importlib.util

    path = os.path.join(os.path.dirname(__file__), "_loops.py")
    spec = importlib.util.spec_from_file_location(__name__ + "_loops_py", path)
    mod = importlib.util.module_from_spec(spec)
    mod.jit = lambda f: f
    spec.loader.exec_module(mod)
    return mod


_py = _load_python_loops()
_bm_chien = _py.bm_chien


# ---------------------------------------------------------------------------
# numpy fallback

def decode_blocks_numpy(received, exp, log):
    received = np.ascontiguousarray(received, dtype=np.uint8)
    n = received.shape[0]
    powers = np.arange(N - 1, -1, -1)
    # (2t, 63) table of alpha^(j*(62-i))
    table = exp[(np.arange(1, _TWO_T + 1)[:, None] * powers[None, :]) % N]
    masked = received[:, None, :].astype(np.int64) * table[None, :, :]
    syn = np.bitwise_xor.reduce(masked, axis=2)
    out = received.copy()
    nerr = np.zeros(n, dtype=np.int64)
    errpos = np.zeros(T_MAX, dtype=np.int64)
    for r in np.flatnonzero(syn.any(axis=1)):
        c = _bm_chien(syn[r], exp, log, errpos)
        nerr[r] = c
        if c > 0:
            out[r, errpos[:c]] ^= 1
    return out, nerr


def warp_nn_numpy(src, inv, out_shape, fill):
    out_h, out_w = out_shape
    rr, cc = np.mgrid[0:out_h, 0:out_w]
    sr = inv[0, 0] * rr + inv[0, 1] * cc + inv[0, 2]
    sc = inv[1, 0] * rr + inv[1, 1] * cc + inv[1, 2]
    ir = np.floor(sr + 0.5).astype(np.int64)
    ic = np.floor(sc + 0.5).astype(np.int64)
    ok = (ir >= 0) & (ir < src.shape[0]) & (ic >= 0) & (ic < src.shape[1])
    out = np.empty((out_h, out_w, src.shape[2]), dtype=src.dtype)
    out[...] = np.asarray(fill, dtype=src.dtype)
    out[ok] = src[ir[ok], ic[ok]]
    return out


# ---------------------------------------------------------------------------
# numba path

_nb_loops = None


def _numba_loops():
    global _nb_loops
    if _nb_loops is None:
        from . import _loops

        _nb_loops = _loops
    return _nb_loops


def decode_blocks_numba(received, exp, log):
    received = np.ascontiguousarray(received, dtype=np.uint8)
    out = np.empty_like(received)
    nerr = np.empty(received.shape[0], dtype=np.int64)
    _numba_loops().decode_loop(received, exp, log, out, nerr)
    return out, nerr


def warp_nn_numba(src, inv, out_shape, fill):
    src = np.ascontiguousarray(src)
    out = np.empty((out_shape[0], out_shape[1], src.shape[2]), dtype=src.dtype)
    _numba_loops().warp_loop(src, np.ascontiguousarray(inv, dtype=np.float64),
                             out_shape[0], out_shape[1], np.asarray(fill, dtype=src.dtype), out)
    return out


def decode_blocks(received, exp, log):
    """Correct a (n, 63) batch of received words.

    Returns ``(corrected_words, nerr)`` where ``nerr[r]`` is the number of
    bits flipped in row r, or -1 if the word is not within distance 5 of a
    codeword.
    """
    if USE_NUMBA:
        return decode_blocks_numba(received, exp, log)
    return decode_blocks_numpy(received, exp, log)


def warp_nn(src, inv, out_shape, fill):
    """Nearest-neighbour resample: ``out[q] = src[round(inv @ q)]``, ``fill`` outside."""
    if USE_NUMBA:
        return warp_nn_numba(src, inv, out_shape, fill)
    return warp_nn_numpy(src, inv, out_shape, fill)
