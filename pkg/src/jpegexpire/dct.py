"""Block transforms: level shift, 8x8 DCT, quantization, zig-zag ordering.

All functions accept either a single 8x8 block or a stack of blocks with
shape (..., 8, 8); they are pure and vectorized over the leading axes.
"""
from __future__ import annotations

import numpy as np

BLOCK = 8

# Zig-zag scan: ZIGZAG[k] is the row-major index of the k-th scanned coefficient.
ZIGZAG = np.array([
    0,  1,  8, 16,  9,  2,  3, 10,
    17, 24, 32, 25, 18, 11,  4,  5,
    12, 19, 26, 33, 40, 48, 41, 34,
    27, 20, 13,  6,  7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36,
    29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46,
    53, 60, 61, 54, 47, 55, 62, 63], dtype=np.int64)

# Inverse permutation: UNZIGZAG[row_major_index] = scan position.
UNZIGZAG = np.argsort(ZIGZAG)


def _dct_matrix() -> np.ndarray:
    k = np.arange(BLOCK)
    mat = np.cos((2 * k[None, :] + 1) * k[:, None] * np.pi / 16) / 2.0
    mat[0, :] /= np.sqrt(2.0)
    return mat


_C = _dct_matrix()          # orthonormal 1-D DCT-II matrix
_CT = _C.T.copy()


def level_shift(block: np.ndarray) -> np.ndarray:
    """Map unsigned samples [0,255] to signed values [-128,127]."""
    return block.astype(np.int16) - 128


def level_unshift(block: np.ndarray) -> np.ndarray:
    """Inverse of level_shift: add 128, round, clamp to [0,255]."""
    shifted = np.floor(np.asarray(block, dtype=np.float64) + 128.0 + 0.5)
    return np.clip(shifted, 0, 255).astype(np.uint8)


def fdct(block: np.ndarray) -> np.ndarray:
    """Forward 2-D DCT with JPEG normalization (DC of a constant-c block is 8c)."""
    x = np.asarray(block, dtype=np.float64)
    return _C @ x @ _CT


def idct(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of fdct; returns real-valued spatial samples."""
    f = np.asarray(coeffs, dtype=np.float64)
    return _CT @ f @ _C


# 13-bit fixed-point rotator constants of the standard integer IDCT.
_FIX_0_298631336 = 2446
_FIX_0_390180644 = 3196
_FIX_0_541196100 = 4433
_FIX_0_765366865 = 6270
_FIX_0_899976223 = 7373
_FIX_1_175875602 = 9633
_FIX_1_501321110 = 12299
_FIX_1_847759065 = 15137
_FIX_1_961570560 = 16069
_FIX_2_053119869 = 16819
_FIX_2_562915447 = 20995
_FIX_3_072711026 = 25172


def _idct_pass(i0, i1, i2, i3, i4, i5, i6, i7, shift):
    # One 8-point pass of the Loeffler-Ligtenberg-Moshovitz fixed-point IDCT.
    half = 1 << (shift - 1)
    z1 = (i2 + i6) * _FIX_0_541196100
    tmp2 = z1 - i6 * _FIX_1_847759065
    tmp3 = z1 + i2 * _FIX_0_765366865
    tmp0 = (i0 + i4) << 13
    tmp1 = (i0 - i4) << 13
    tmp10, tmp13 = tmp0 + tmp3, tmp0 - tmp3
    tmp11, tmp12 = tmp1 + tmp2, tmp1 - tmp2

    t0, t1, t2, t3 = i7, i5, i3, i1
    z1 = t0 + t3
    z2 = t1 + t2
    z3 = t0 + t2
    z4 = t1 + t3
    z5 = (z3 + z4) * _FIX_1_175875602
    t0 = t0 * _FIX_0_298631336
    t1 = t1 * _FIX_2_053119869
    t2 = t2 * _FIX_3_072711026
    t3 = t3 * _FIX_1_501321110
    z1 = z1 * -_FIX_0_899976223
    z2 = z2 * -_FIX_2_562915447
    z3 = z3 * -_FIX_1_961570560 + z5
    z4 = z4 * -_FIX_0_390180644 + z5
    t0 = t0 + z1 + z3
    t1 = t1 + z2 + z4
    t2 = t2 + z2 + z3
    t3 = t3 + z1 + z4

    return ((tmp10 + t3 + half) >> shift, (tmp11 + t2 + half) >> shift,
            (tmp12 + t1 + half) >> shift, (tmp13 + t0 + half) >> shift,
            (tmp13 - t0 + half) >> shift, (tmp12 - t1 + half) >> shift,
            (tmp11 - t2 + half) >> shift, (tmp10 - t3 + half) >> shift)


def idct_interop(coeffs: np.ndarray) -> np.ndarray:
    """Integer IDCT bit-compatible with the de-facto standard decoder.

    Takes dequantized coefficients (..., 8, 8) and returns unsigned samples
    including the +128 level unshift. Used by the decode pipeline so that
    reconstructed planes agree sample-exactly with common JPEG decoders.
    """
    f = np.asarray(coeffs, dtype=np.int64)
    cols = _idct_pass(*(f[..., k, :] for k in range(BLOCK)), 11)
    ws = np.stack(cols, axis=-2)
    rows = _idct_pass(*(ws[..., :, k] for k in range(BLOCK)), 18)
    out = np.stack(rows, axis=-1)
    return np.clip(out + 128, 0, 255).astype(np.uint8)


def quantize(coeffs: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Divide pointwise by the table, rounding half away from zero."""
    c = np.asarray(coeffs, dtype=np.float64)
    q = np.sign(c) * np.floor(np.abs(c) / table + 0.5)
    return q.astype(np.int32)


def dequantize(qcoeffs: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Multiply pointwise by the table."""
    return qcoeffs.astype(np.int32) * table.astype(np.int32)


def zigzag_flatten(blocks: np.ndarray) -> np.ndarray:
    """(..., 8, 8) -> (..., 64) in zig-zag scan order."""
    flat = np.asarray(blocks).reshape(*blocks.shape[:-2], 64)
    return flat[..., ZIGZAG]


def zigzag_unflatten(scans: np.ndarray) -> np.ndarray:
    """(..., 64) in scan order -> (..., 8, 8) row-major blocks."""
    arr = np.asarray(scans)
    return arr[..., UNZIGZAG].reshape(*arr.shape[:-1], 8, 8)


def validate_quant_table(table: np.ndarray) -> np.ndarray:
    """Check an 8x8 integer table with entries in [1,255]; returns it as int32."""
    t = np.asarray(table)
    if t.shape != (8, 8):
        raise ValueError(f"quantization table must be 8x8, got {t.shape}")
    if not np.issubdtype(t.dtype, np.integer):
        raise ValueError("quantization table must be integer-valued")
    if t.min() < 1 or t.max() > 255:
        raise ValueError("quantization table entries must lie in [1,255]")
    return t.astype(np.int32)
