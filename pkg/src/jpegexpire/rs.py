"""Systematic Reed-Solomon (255,191) over GF(256).

64 parity symbols per codeword correct up to 32 unknown-position symbol
errors. Generator roots are alpha^1 through alpha^64 over the field defined
in gf256. A decoded codeword is re-checked against its syndromes, so the
decoder either returns the transmitted data, raises RSDecodeFailure, or (for
heavy corruption) returns a different valid codeword that downstream
integrity checks must catch.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .errors import RSDecodeFailure
from .gf256 import EXP, LOG, gf_mul

N = 255
K = 191
PARITY = N - K
T = PARITY // 2  # correctable symbol errors per codeword
FIRST_ROOT = 1


def _generator_poly() -> np.ndarray:
    """g(x) = prod_{i=1..64} (x - alpha^i), coefficients low degree first."""
    g = [1]
    for i in range(PARITY):
        root = int(EXP[(FIRST_ROOT + i) % 255])
        nxt = [0] * (len(g) + 1)
        for j, c in enumerate(g):
            nxt[j] ^= gf_mul(c, root)
            nxt[j + 1] ^= c
        g = nxt
    return np.array(g, dtype=np.uint8)


_GEN = _generator_poly()
# taps ordered x^63 .. x^0, leading x^64 term dropped
_GEN_TAPS = _GEN[:-1][::-1].copy()

_EXP = EXP.astype(np.int64)
_LOG = LOG.astype(np.int64)


@njit(cache=True)
def _encode_batch(data, exp, log, taps, out):
    n_cw = data.shape[0]
    parity = np.zeros(PARITY, dtype=np.uint8)
    for cw in range(n_cw):
        parity[:] = 0
        for i in range(K):
            fb = data[cw, i] ^ parity[0]
            if fb != 0:
                lfb = log[fb]
                for j in range(PARITY - 1):
                    t = taps[j]
                    if t != 0:
                        parity[j] = parity[j + 1] ^ exp[lfb + log[t]]
                    else:
                        parity[j] = parity[j + 1]
                t = taps[PARITY - 1]
                parity[PARITY - 1] = exp[lfb + log[t]] if t != 0 else 0
            else:
                for j in range(PARITY - 1):
                    parity[j] = parity[j + 1]
                parity[PARITY - 1] = 0
        out[cw, :K] = data[cw]
        out[cw, K:] = parity
    return out


@njit(cache=True)
def _syndromes(cw, exp, log, syn):
    """syn[j] = C(alpha^(j+FIRST_ROOT)); returns True if any is nonzero."""
    any_nonzero = False
    for j in range(PARITY):
        alog = j + FIRST_ROOT
        acc = 0
        for i in range(N):
            if acc != 0:
                acc = exp[log[acc] + alog]
            acc ^= cw[i]
        syn[j] = acc
        if acc != 0:
            any_nonzero = True
    return any_nonzero


@njit(cache=True)
def _decode_one(cw, exp, log):
    """Correct cw in place. Returns corrected symbol count, or -1 on failure."""
    syn = np.zeros(PARITY, dtype=np.int64)
    if not _syndromes(cw, exp, log, syn):
        return 0

    # Berlekamp-Massey; sigma low degree first
    sigma = np.zeros(T + 2, dtype=np.int64)
    prev = np.zeros(T + 2, dtype=np.int64)
    temp = np.zeros(T + 2, dtype=np.int64)
    sigma[0] = 1
    prev[0] = 1
    L = 0
    m = 1
    b = 1
    for it in range(PARITY):
        d = syn[it]
        for i in range(1, min(L, it) + 1):
            if sigma[i] != 0 and syn[it - i] != 0:
                d ^= exp[log[sigma[i]] + log[syn[it - i]]]
        if d == 0:
            m += 1
            continue
        coef_log = (log[d] + 255 - log[b]) % 255
        if 2 * L <= it:
            temp[:] = sigma[:]
            for i in range(T + 2 - m):
                if prev[i] != 0:
                    sigma[i + m] ^= exp[coef_log + log[prev[i]]]
            L = it + 1 - L
            prev[:] = temp[:]
            b = d
            m = 1
        else:
            for i in range(T + 2 - m):
                if prev[i] != 0:
                    sigma[i + m] ^= exp[coef_log + log[prev[i]]]
            m += 1
    if L > T:
        return -1

    # Chien search: sigma(alpha^-p) == 0 <=> error at array index 254-p
    err_pos = np.zeros(T, dtype=np.int64)
    n_err = 0
    for p in range(N):
        ylog = (255 - p) % 255
        acc = 0
        for i in range(L, -1, -1):
            if acc != 0:
                acc = exp[log[acc] + ylog]
            acc ^= sigma[i]
        if acc == 0:
            if n_err >= L:
                return -1
            err_pos[n_err] = 254 - p
            n_err += 1
    if n_err != L:
        return -1

    # Omega(x) = S(x) sigma(x) mod x^PARITY
    omega = np.zeros(PARITY, dtype=np.int64)
    for i in range(PARITY):
        acc = 0
        top = i if i < L else L
        for j in range(top + 1):
            if sigma[j] != 0 and syn[i - j] != 0:
                acc ^= exp[log[sigma[j]] + log[syn[i - j]]]
        omega[i] = acc

    # Forney (first generator root alpha^1): e = Omega(X^-1) / sigma'(X^-1)
    for k in range(n_err):
        pos = err_pos[k]
        x_log = (254 - pos) % 255          # X = alpha^(254-pos)
        xinv_log = (255 - x_log) % 255
        om = 0
        for i in range(PARITY - 1, -1, -1):
            if om != 0:
                om = exp[log[om] + xinv_log]
            om ^= omega[i]
        dsig = 0
        for i in range(1, L + 1, 2):       # derivative keeps odd-degree terms
            if sigma[i] != 0:
                dsig ^= exp[(log[sigma[i]] + (i - 1) * xinv_log) % 255]
        if dsig == 0:
            return -1
        if om != 0:
            mag = exp[(log[om] + 255 - log[dsig]) % 255]
            cw[pos] ^= mag

    # consistency re-check
    if _syndromes(cw, exp, log, syn):
        return -1
    return n_err


@njit(cache=True)
def _decode_batch(words, exp, log, corrected):
    for i in range(words.shape[0]):
        corrected[i] = _decode_one(words[i], exp, log)
    return corrected


def rs_encode(data: bytes | np.ndarray) -> bytes:
    """Encode exactly 191 data bytes into a 255-byte systematic codeword."""
    arr = np.frombuffer(bytes(data), dtype=np.uint8) if not isinstance(data, np.ndarray) else data
    if arr.size != K:
        raise ValueError(f"rs_encode needs exactly {K} bytes, got {arr.size}")
    out = np.empty((1, N), dtype=np.uint8)
    _encode_batch(np.ascontiguousarray(arr.reshape(1, K)), _EXP, _LOG, _GEN_TAPS, out)
    return out[0].tobytes()


def rs_decode(codeword: bytes | np.ndarray) -> tuple[bytes, int]:
    """Decode a 255-byte codeword; returns (data, corrected symbol count).

    Raises RSDecodeFailure when the corruption is detectably unrecoverable.
    Undetectable miscorrections past 32 errors are possible in principle;
    callers verify a hash of the payload downstream.
    """
    arr = np.frombuffer(bytes(codeword), dtype=np.uint8) if not isinstance(codeword, np.ndarray) else codeword
    if arr.size != N:
        raise ValueError(f"rs_decode needs exactly {N} bytes, got {arr.size}")
    work = arr.astype(np.uint8).copy()
    corrected = np.empty(1, dtype=np.int64)
    _decode_batch(work.reshape(1, N), _EXP, _LOG, corrected)
    if corrected[0] < 0:
        raise RSDecodeFailure("unrecoverable codeword corruption")
    return work[:K].tobytes(), int(corrected[0])


def rs_encode_batch(data: np.ndarray) -> np.ndarray:
    """(n, 191) uint8 -> (n, 255) uint8."""
    out = np.empty((data.shape[0], N), dtype=np.uint8)
    _encode_batch(np.ascontiguousarray(data, dtype=np.uint8), _EXP, _LOG, _GEN_TAPS, out)
    return out


def rs_decode_batch(words: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(n, 255) -> ((n, 191) data, (n,) corrected counts; -1 marks failure)."""
    work = np.ascontiguousarray(words, dtype=np.uint8).copy()
    corrected = np.empty(work.shape[0], dtype=np.int64)
    _decode_batch(work, _EXP, _LOG, corrected)
    return work[:, :K], corrected


def rs_encode_stream(payload: bytes) -> bytes:
    """Split into 191-byte chunks (final chunk zero-padded) and encode each."""
    if not payload:
        return b""
    n_chunks = -(-len(payload) // K)
    buf = np.zeros((n_chunks, K), dtype=np.uint8)
    flat = np.frombuffer(payload, dtype=np.uint8)
    buf.reshape(-1)[:flat.size] = flat
    return rs_encode_batch(buf).tobytes()


def rs_decode_stream(coded: bytes, length: int | None = None) -> bytes:
    """Decode a stream of whole codewords; optionally truncate to length.

    The zero padding added by rs_encode_stream is kept unless the caller
    passes the original payload length (framing layers record it).
    """
    if len(coded) % N:
        raise ValueError(f"coded stream length must be a multiple of {N}")
    if not coded:
        return b""
    words = np.frombuffer(coded, dtype=np.uint8).reshape(-1, N)
    data, corrected = rs_decode_batch(words)
    if (corrected < 0).any():
        bad = int(np.nonzero(corrected < 0)[0][0])
        raise RSDecodeFailure(f"unrecoverable corruption in codeword {bad}")
    out = data.reshape(-1).tobytes()
    return out[:length] if length is not None else out
