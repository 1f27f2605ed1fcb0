"""Scalar loop bodies shared by the numba and pure-Python kernel paths.

Imported normally this module compiles every function with numba.  The
fallback path loads the same file a second time with ``jit`` pre-set to the
identity (see ``_kernels``), so both paths run identical source.
"""
import numpy as np

N = 63
T_MAX = 5
_TWO_T = 2 * T_MAX

if "jit" not in globals():
    import numba

    jit = numba.njit(cache=True, nogil=True)



@jit
def gf_mul(a, b, exp, log):
    if a == 0 or b == 0:
        return 0
    return exp[log[a] + log[b]]


@jit
def gf_div(a, b, exp, log):
    if a == 0:
        return 0
    return exp[(log[a] - log[b]) % N]


@jit
def bm_chien(syn, exp, log, errpos):
    """Locate errors from syndromes S_1..S_2t.

    Writes bit indices into ``errpos`` and returns the error count, or -1
    when the locator has no consistent set of roots (more than t errors).
    """
    C = np.zeros(_TWO_T + 1, dtype=np.int64)
    B = np.zeros(_TWO_T + 1, dtype=np.int64)
    Tmp = np.zeros(_TWO_T + 1, dtype=np.int64)
    C[0] = 1
    B[0] = 1
    L = 0
    m = 1
    b = 1
    for n in range(_TWO_T):
        d = syn[n]
        for i in range(1, L + 1):
            d ^= gf_mul(C[i], syn[n - i], exp, log)
        if d == 0:
            m += 1
            continue
        coef = gf_div(d, b, exp, log)
        if 2 * L <= n:
            for i in range(_TWO_T + 1):
                Tmp[i] = C[i]
            for i in range(_TWO_T + 1 - m):
                C[i + m] ^= gf_mul(coef, B[i], exp, log)
            L = n + 1 - L
            for i in range(_TWO_T + 1):
                B[i] = Tmp[i]
            b = d
            m = 1
        else:
            for i in range(_TWO_T + 1 - m):
                C[i + m] ^= gf_mul(coef, B[i], exp, log)
            m += 1
    if L > T_MAX:
        return -1
    count = 0
    # bit index i carries x^(62-i); its locator is alpha^(62-i)
    for e in range(N):
        acc = 0
        for j in range(L + 1):
            if C[j] != 0:
                acc ^= exp[(log[C[j]] + (N - e) * j) % N]
        if acc == 0:
            if count >= T_MAX:
                return -1
            errpos[count] = N - 1 - e
            count += 1
    if count != L:
        return -1
    return count


@jit
def decode_loop(received, exp, log, out, nerr):
    n = received.shape[0]
    syn = np.zeros(_TWO_T, dtype=np.int64)
    errpos = np.zeros(T_MAX, dtype=np.int64)
    for r in range(n):
        any_nz = False
        for j in range(_TWO_T):
            s = 0
            for i in range(N):
                if received[r, i]:
                    s ^= exp[((j + 1) * (N - 1 - i)) % N]
            syn[j] = s
            if s != 0:
                any_nz = True
        for i in range(N):
            out[r, i] = received[r, i]
        if not any_nz:
            nerr[r] = 0
            continue
        c = bm_chien(syn, exp, log, errpos)
        nerr[r] = c
        for k in range(max(c, 0)):
            out[r, errpos[k]] ^= 1


@jit
def warp_loop(src, inv, out_h, out_w, fill, out):
    # inv maps output (row, col) to source (row, col): [a11 a12 tr; a21 a22 tc]
    h = src.shape[0]
    w = src.shape[1]
    for r in range(out_h):
        for c in range(out_w):
            sr = inv[0, 0] * r + inv[0, 1] * c + inv[0, 2]
            sc = inv[1, 0] * r + inv[1, 1] * c + inv[1, 2]
            ir = int(np.floor(sr + 0.5))
            ic = int(np.floor(sc + 0.5))
            if 0 <= ir < h and 0 <= ic < w:
                for k in range(src.shape[2]):
                    out[r, c, k] = src[ir, ic, k]
            else:
                for k in range(src.shape[2]):
                    out[r, c, k] = fill[k]
