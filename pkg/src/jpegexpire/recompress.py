"""Adversarial upload-pipeline simulation and the quantization-cancellation
experiment.

recompress() reproduces what a hosting service does to an uploaded JPEG:
decode, optional downscale to the service maximum, strip header metadata,
re-encode with the service's own tables and subsampling. Images already at
the maximum dimensions are not rescaled.

cancellation_experiment() reproduces the instructive failure of trying to
survive requantization by uploading with the reciprocal quantization table:
flawless under exact real arithmetic, badly corrupted once the pipeline
rounds like optimized integer decoders do. The integer model here quantizes
the DCT basis to a few fractional bits and rounds samples to 8-bit between
stages; the exact corruption level is implementation specific, the
qualitative collapse is the point.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from . import codec, jfif
from .dct import fdct, idct, zigzag_flatten, zigzag_unflatten
from .profiles import SiteProfile


def recompress(data: bytes, profile: SiteProfile) -> bytes:
    """Run file bytes through the simulated upload pipeline of a site."""
    img = jfif.parse_jfif(data)
    raster = codec.decode(img)
    h, w = raster.shape[:2]
    if w > profile.max_width or h > profile.max_height:
        scale = min(profile.max_width / w, profile.max_height / h)
        new_w = max(8, int(round(w * scale)))
        new_h = max(8, int(round(h * scale)))
        pil = Image.fromarray(raster).resize((new_w, new_h), Image.BILINEAR)
        raster = np.asarray(pil)
    if profile.strip_metadata:
        comments, apps = [], []
    else:
        comments, apps = img.comments, img.app_segments
    out = codec.encode(raster, profile.luma_quant, profile.chroma_quant,
                       subsampling=profile.chroma_subsampling,
                       comments=comments, app_segments=apps)
    return jfif.serialize_jfif(out)


def inverse_quantization_table(table: np.ndarray) -> np.ndarray:
    """Pointwise reciprocal: entries in (0, 1]. Not a legal file table."""
    t = np.asarray(table, dtype=np.float64)
    if (t < 1).any():
        raise ValueError("quantization table entries must be >= 1")
    return 1.0 / t


def measure_ber(sent: bytes, received: bytes) -> float:
    """Fraction of differing bytes; missing tail bytes count as errors."""
    if not sent and not received:
        return 0.0
    n = max(len(sent), len(received))
    m = min(len(sent), len(received))
    a = np.frombuffer(sent[:m], dtype=np.uint8)
    b = np.frombuffer(received[:m], dtype=np.uint8)
    return (int((a != b).sum()) + (n - m)) / n


@dataclass(frozen=True)
class CancellationReport:
    arithmetic: str
    ber: float
    n_bytes: int


# One payload byte per block: four 2-bit symbols in the first four AC scan
# positions, mapped to quantized values {-2,-1,1,2} (never 0, so symbols
# stay distinguishable from empty coefficients).
_SYMBOL_VALUES = np.array([-2, -1, 1, 2], dtype=np.int32)
_N_DATA_COEF = 4


def _payload_to_blocks(payload: bytes) -> np.ndarray:
    data = np.frombuffer(payload, dtype=np.uint8)
    blocks = np.zeros((data.size, 64), dtype=np.int32)
    for k in range(_N_DATA_COEF):
        symbols = (data >> (6 - 2 * k)) & 3
        blocks[:, 1 + k] = _SYMBOL_VALUES[symbols]
    return blocks


def _blocks_to_payload(scanned: np.ndarray) -> bytes:
    out = np.zeros(scanned.shape[0], dtype=np.uint8)
    for k in range(_N_DATA_COEF):
        vals = scanned[:, 1 + k]
        # nearest symbol wins; exact hits are the common case
        dist = np.abs(vals[:, None] - _SYMBOL_VALUES[None, :])
        out = (out << 2) | np.argmin(dist, axis=1).astype(np.uint8)
    return out.tobytes()


def cancellation_experiment(payload: bytes, profile: SiteProfile,
                            arithmetic: str = "exact",
                            frac_bits: int = 5) -> CancellationReport:
    """Push a payload through the reciprocal-table scheme once.

    arithmetic="exact": every stage in real arithmetic, reciprocal table kept
    real-valued; the quantize/dequantize pair cancels and the byte error rate
    is zero.

    arithmetic="integer": what an optimized deployment actually does. The
    uploaded file's table is forced to legal integers (the reciprocals all
    collapse to 1), samples are rounded and clamped to 8 bits between stages,
    and the transforms run in fixed point with `frac_bits` fractional bits
    and a truncating descale. The resulting byte error rate depends on those
    choices; the collapse of the scheme does not.
    """
    if arithmetic not in ("exact", "integer"):
        raise ValueError("arithmetic must be 'exact' or 'integer'")
    if not payload:
        return CancellationReport(arithmetic, 0.0, 0)

    table = np.asarray(profile.luma_quant, dtype=np.float64)
    inv_table = inverse_quantization_table(profile.luma_quant)
    wanted = _payload_to_blocks(payload)           # quantized-domain data, scan order
    dequant = zigzag_unflatten(wanted).astype(np.float64) * table
    spatial = idct(dequant)                        # real-valued upload content

    if arithmetic == "exact":
        # publisher encodes with the real reciprocal table
        up_q = np.round(fdct(spatial) / inv_table)
        # site: dequantize with the stored reciprocal table, IDCT to pixels
        site_pixels = idct(up_q * inv_table)
        # site re-encode with its own table
        stored = np.round(fdct(site_pixels) / table).astype(np.int32)
    else:
        from .dct import _dct_matrix
        basis = np.round(_dct_matrix() * (1 << frac_bits)).astype(np.int64)
        descale = 2 * frac_bits

        def int_fdct(x):
            return (basis @ x.astype(np.int64) @ basis.T) >> descale

        def int_idct(f):
            return (basis.T @ f.astype(np.int64) @ basis) >> descale

        def to_u8(b):
            return (np.clip(np.floor(b + 128.5), 0, 255) - 128.0).astype(np.int64)

        inv_int = np.maximum(1, np.round(inv_table)).astype(np.int64)
        up_q = np.round(int_fdct(to_u8(spatial)) / inv_int)
        site_pixels = to_u8(int_idct((up_q * inv_int).astype(np.int64)))
        stored = np.round(int_fdct(site_pixels) / table).astype(np.int32)

    scanned = zigzag_flatten(stored)
    recovered = _blocks_to_payload(scanned)
    return CancellationReport(arithmetic, measure_ber(payload, recovered), len(payload))
