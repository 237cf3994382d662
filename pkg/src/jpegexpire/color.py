"""Color model conversion, chroma subsampling, and chroma upsampling.

Conversions use the JFIF matrix with round-half-up and clamping to [0,255].
Upsampling reproduces the triangle filter of the de-facto standard decoder
so that reconstructed pixels agree with it to within one code value.
"""
from __future__ import annotations

import numpy as np

# Exact inverse-matrix coefficients derived from the forward constants.
_KR, _KG, _KB = 0.299, 0.587, 0.114
_CB_G = _KB * 1.772 / _KG      # 0.344136...
_CR_G = _KR * 1.402 / _KG      # 0.714136...

_FWD = np.array([
    [_KR, _KG, _KB],
    [-0.5 * _KR / (1 - _KB), -0.5 * _KG / (1 - _KB), 0.5],
    [0.5, -0.5 * _KG / (1 - _KR), -0.5 * _KB / (1 - _KR)],
]).T.copy()
_FWD_OFF = np.array([0.5, 128.5, 128.5])  # +0.5 folds round-half-up into floor

_INV = np.array([
    [1.0, 0.0, 1.402],
    [1.0, -_CB_G, -_CR_G],
    [1.0, 1.772, 0.0],
]).T.copy()
_INV_OFF = np.array([0.5 - 128 * 1.402,
                     0.5 + 128 * (_CB_G + _CR_G),
                     0.5 - 128 * 1.772])


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


def rgb_to_ycbcr(rgb: np.ndarray) -> np.ndarray:
    """JFIF RGB -> YCbCr for an (..., 3) array; returns uint8."""
    arr = np.asarray(rgb, dtype=np.float64)
    out = np.floor(arr @ _FWD + _FWD_OFF)
    return np.clip(out, 0, 255, out=out).astype(np.uint8)


def ycbcr_to_rgb(ycbcr: np.ndarray) -> np.ndarray:
    """JFIF YCbCr -> RGB for an (..., 3) array; returns uint8."""
    arr = np.asarray(ycbcr, dtype=np.float64)
    out = np.floor(arr @ _INV + _INV_OFF)
    return np.clip(out, 0, 255, out=out).astype(np.uint8)


def subsample_420(plane: np.ndarray) -> np.ndarray:
    """Halve both plane dimensions; each output is the rounded mean of its
    2x2 source window (edge windows fall back to the available samples)."""
    p = np.asarray(plane, dtype=np.float64)
    h, w = p.shape
    if h % 2 or w % 2:
        p = np.pad(p, ((0, h % 2), (0, w % 2)), mode="edge")
    s = (p[0::2, 0::2] + p[0::2, 1::2] + p[1::2, 0::2] + p[1::2, 1::2]) / 4.0
    return np.clip(_round_half_up(s), 0, 255).astype(np.uint8)


def upsample_h2v1(plane: np.ndarray, out_w: int) -> np.ndarray:
    """Horizontal 2x triangle-filter upsampling (integer arithmetic)."""
    p = plane.astype(np.int32)
    h, w = p.shape
    out = np.empty((h, 2 * w), dtype=np.int32)
    left = np.concatenate([p[:, :1], p[:, :-1]], axis=1)
    right = np.concatenate([p[:, 1:], p[:, -1:]], axis=1)
    out[:, 0::2] = (3 * p + left + 1) >> 2
    out[:, 1::2] = (3 * p + right + 2) >> 2
    out[:, 0] = p[:, 0]
    out[:, -1] = p[:, -1]
    return out[:, :out_w].astype(np.uint8)


def upsample_h2v2(plane: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """2x2 triangle-filter upsampling (weights 9/3/3/1, integer arithmetic)."""
    p = plane.astype(np.int32)
    h, w = p.shape
    above = np.concatenate([p[:1], p[:-1]], axis=0)
    below = np.concatenate([p[1:], p[-1:]], axis=0)
    # Column sums 3*near + far for the two output rows each input row yields.
    top = 3 * p + above
    bot = 3 * p + below

    def _expand_row(cs: np.ndarray) -> np.ndarray:
        left = np.concatenate([cs[:, :1], cs[:, :-1]], axis=1)
        right = np.concatenate([cs[:, 1:], cs[:, -1:]], axis=1)
        row = np.empty((cs.shape[0], 2 * cs.shape[1]), dtype=np.int32)
        row[:, 0::2] = (3 * cs + left + 8) >> 4
        row[:, 1::2] = (3 * cs + right + 7) >> 4
        row[:, 0] = (cs[:, 0] * 4 + 8) >> 4
        row[:, -1] = (cs[:, -1] * 4 + 7) >> 4
        return row

    out = np.empty((2 * h, 2 * w), dtype=np.int32)
    out[0::2] = _expand_row(top)
    out[1::2] = _expand_row(bot)
    return out[:out_h, :out_w].astype(np.uint8)


def upsample_replicate(plane: np.ndarray, hs: int, vs: int, out_h: int, out_w: int) -> np.ndarray:
    """Pixel replication for the remaining sampling-factor combinations."""
    out = np.repeat(np.repeat(plane, vs, axis=0), hs, axis=1)
    return out[:out_h, :out_w]


def upsample(plane: np.ndarray, hs: int, vs: int, out_h: int, out_w: int) -> np.ndarray:
    """Upsample one chroma plane by integer factors (hs, vs) in {1,2}."""
    if hs == 1 and vs == 1:
        return plane[:out_h, :out_w]
    if hs == 2 and vs == 2:
        return upsample_h2v2(plane, out_h, out_w)
    if hs == 2 and vs == 1:
        return upsample_h2v1(plane, out_w)[:out_h]
    return upsample_replicate(plane, hs, vs, out_h, out_w)
