"""Full encode/decode pipelines with embedding hook points.

Hooks fire on luminance blocks only, in raster block order, regardless of
the MCU interleave used by the entropy stage:

  encode: color convert -> subsample -> level shift -> [pre_dct] -> FDCT
          -> quantize -> entropy code
  decode: entropy decode -> dequantize -> IDCT -> [post_idct] -> level
          unshift -> upsample -> color convert

pre_dct receives a level-shifted int16 8x8 block and may return a
replacement; post_idct receives the reconstructed block in the same
level-shifted domain and its return value is ignored.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import color, dct, entropy
from .errors import EncodeRangeError, JpegParseError
from .hufftables import (HuffmanTable, STD_AC_CHROMA, STD_AC_LUMA,
                         STD_DC_CHROMA, STD_DC_LUMA)
from .jfif import ComponentSpec, JfifImage

BlockHook = Callable[[np.ndarray, int, int], Optional[np.ndarray]]


@dataclass
class CodecHooks:
    """Callbacks invoked on spatial luminance blocks during transform stages."""

    pre_dct: BlockHook | None = None
    post_idct: BlockHook | None = None


STD_HUFFMAN = {
    ("dc", 0): STD_DC_LUMA,
    ("ac", 0): STD_AC_LUMA,
    ("dc", 1): STD_DC_CHROMA,
    ("ac", 1): STD_AC_CHROMA,
}


def _blockify(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    return plane.reshape(h // 8, 8, w // 8, 8).transpose(0, 2, 1, 3)


def _unblockify(blocks: np.ndarray) -> np.ndarray:
    bh, bw = blocks.shape[:2]
    return blocks.transpose(0, 2, 1, 3).reshape(bh * 8, bw * 8)


def _pad_to(plane: np.ndarray, ph: int, pw: int) -> np.ndarray:
    h, w = plane.shape
    if h == ph and w == pw:
        return plane
    return np.pad(plane, ((0, ph - h), (0, pw - w)), mode="edge")


_LAYOUT_CACHE: dict[tuple, tuple] = {}


def scan_layout(components: list[ComponentSpec], mcu_w: int, mcu_h: int
                ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int]:
    """Per-scan-unit (component index, flat block index, DC/AC table ids).

    Flat block indices address each component's raster-ordered block array of
    shape (mcu_h * v, mcu_w * h).
    """
    key = (tuple((c.h, c.v, c.td, c.ta) for c in components), mcu_w, mcu_h)
    cached = _LAYOUT_CACHE.get(key)
    if cached is not None:
        return cached
    units_per_mcu = sum(c.h * c.v for c in components)
    n_units = units_per_mcu * mcu_w * mcu_h
    comp_of_unit = np.empty(n_units, dtype=np.uint8)
    block_of_unit = np.empty(n_units, dtype=np.int64)
    dc_of_unit = np.empty(n_units, dtype=np.uint8)
    ac_of_unit = np.empty(n_units, dtype=np.uint8)

    slot = 0
    for my in range(mcu_h):
        for mx in range(mcu_w):
            for ci, c in enumerate(components):
                bw = mcu_w * c.h
                for by in range(c.v):
                    for bx in range(c.h):
                        comp_of_unit[slot] = ci
                        block_of_unit[slot] = (my * c.v + by) * bw + (mx * c.h + bx)
                        dc_of_unit[slot] = c.td
                        ac_of_unit[slot] = c.ta
                        slot += 1
    result = (comp_of_unit, block_of_unit, dc_of_unit, ac_of_unit, units_per_mcu)
    if len(_LAYOUT_CACHE) < 64:
        _LAYOUT_CACHE[key] = result
    return result


def _apply_pre_hook(blocks: np.ndarray, hook: BlockHook) -> np.ndarray:
    out = blocks.copy()
    for r in range(blocks.shape[0]):
        for c in range(blocks.shape[1]):
            replacement = hook(out[r, c], r, c)
            if replacement is None:
                continue
            rep = np.asarray(replacement)
            if rep.shape != (8, 8):
                raise EncodeRangeError(f"pre_dct hook returned shape {rep.shape} for block ({r},{c})")
            if rep.min() < -128 or rep.max() > 127:
                raise EncodeRangeError(f"pre_dct hook returned out-of-range samples for block ({r},{c})")
            out[r, c] = rep
    return out


def validate_raster(image: np.ndarray) -> np.ndarray:
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ValueError("raster image must be (h, w, 3) uint8")
    if img.shape[0] < 8 or img.shape[1] < 8:
        raise ValueError("image must be at least 8x8 pixels")
    return img


def encode(image: np.ndarray,
           luma_quant: np.ndarray,
           chroma_quant: np.ndarray,
           subsampling: str = "420",
           hooks: CodecHooks | None = None,
           comments: list[bytes] | None = None,
           app_segments: list[tuple[int, bytes]] | None = None,
           huffman: dict[tuple[str, int], HuffmanTable] | None = None,
           restart_interval: int = 0) -> JfifImage:
    """Encode an RGB raster into a baseline JFIF structure."""
    img = validate_raster(image)
    if subsampling not in ("444", "420"):
        raise ValueError(f"unsupported subsampling mode {subsampling!r}")
    lq = dct.validate_quant_table(luma_quant)
    cq = dct.validate_quant_table(chroma_quant)
    tables = dict(STD_HUFFMAN if huffman is None else huffman)

    h, w = img.shape[:2]
    ycc = color.rgb_to_ycbcr(img)
    factor = 16 if subsampling == "420" else 8
    ph = -(-h // factor) * factor
    pw = -(-w // factor) * factor

    planes = [_pad_to(ycc[..., i], ph, pw) for i in range(3)]
    if subsampling == "420":
        planes[1] = color.subsample_420(planes[1])
        planes[2] = color.subsample_420(planes[2])
        comps = [ComponentSpec(1, 2, 2, 0, 0, 0),
                 ComponentSpec(2, 1, 1, 1, 1, 1),
                 ComponentSpec(3, 1, 1, 1, 1, 1)]
    else:
        comps = [ComponentSpec(1, 1, 1, 0, 0, 0),
                 ComponentSpec(2, 1, 1, 1, 1, 1),
                 ComponentSpec(3, 1, 1, 1, 1, 1)]

    quant_by_comp = [lq, cq, cq]
    coeff_arrays = []
    for ci, plane in enumerate(planes):
        blocks = dct.level_shift(_blockify(plane))
        if ci == 0 and hooks is not None and hooks.pre_dct is not None:
            blocks = _apply_pre_hook(blocks, hooks.pre_dct)
        freq = dct.fdct(blocks)
        quantized = dct.quantize(freq, quant_by_comp[ci])
        coeff_arrays.append(dct.zigzag_flatten(quantized).reshape(-1, 64))

    mcu_w, mcu_h = pw // factor, ph // factor
    comp_of_unit, block_of_unit, dc_of_unit, ac_of_unit, upm = scan_layout(comps, mcu_w, mcu_h)
    offsets = np.cumsum([0] + [c.shape[0] for c in coeff_arrays])
    all_coeff = np.concatenate(coeff_arrays, axis=0)
    flat_index = offsets[comp_of_unit] + block_of_unit
    scan_coeff = all_coeff[flat_index]

    dc_tables = [tables[("dc", 0)], tables[("dc", 1)]]
    ac_tables = [tables[("ac", 0)], tables[("ac", 1)]]
    scan = entropy.encode_scan(scan_coeff, comp_of_unit, dc_of_unit, ac_of_unit,
                               dc_tables, ac_tables, restart_interval, upm)

    return JfifImage(
        width=w, height=h, components=comps,
        quant_tables={0: lq, 1: cq},
        huffman_tables=tables,
        scan_data=scan,
        comments=list(comments or []),
        app_segments=list(app_segments or []),
        restart_interval=restart_interval)


def decode(img: JfifImage, hooks: CodecHooks | None = None) -> np.ndarray:
    """Decode a parsed JFIF structure back to an RGB raster."""
    comps = img.components
    max_h = max(c.h for c in comps)
    max_v = max(c.v for c in comps)
    mcu_w = -(-img.width // (8 * max_h))
    mcu_h = -(-img.height // (8 * max_v))

    comp_of_unit, block_of_unit, dc_of_unit, ac_of_unit, upm = scan_layout(comps, mcu_w, mcu_h)
    n_units = comp_of_unit.shape[0]

    dc_ids = sorted({c.td for c in comps})
    ac_ids = sorted({c.ta for c in comps})
    try:
        dc_tables = [img.huffman_tables[("dc", i)] for i in dc_ids]
        ac_tables = [img.huffman_tables[("ac", i)] for i in ac_ids]
    except KeyError as exc:
        raise JpegParseError(f"scan references missing Huffman table {exc}") from None
    dc_map = np.zeros(16, dtype=np.uint8)
    ac_map = np.zeros(16, dtype=np.uint8)
    dc_map[dc_ids] = np.arange(len(dc_ids))
    ac_map[ac_ids] = np.arange(len(ac_ids))
    dc_sel = dc_map[dc_of_unit]
    ac_sel = ac_map[ac_of_unit]

    scan_coeff = entropy.decode_scan(img.scan_data, n_units, comp_of_unit,
                                     dc_sel, ac_sel, dc_tables, ac_tables,
                                     img.restart_interval, upm)

    planes = []
    unit_base = 0
    offsets = []
    sizes = []
    for c in comps:
        nb = (mcu_h * c.v) * (mcu_w * c.h)
        offsets.append(unit_base)
        sizes.append(nb)
        unit_base += nb

    for ci, c in enumerate(comps):
        mask = comp_of_unit == ci
        per_comp = np.empty((sizes[ci], 64), dtype=np.int16)
        per_comp[block_of_unit[mask]] = scan_coeff[mask]
        try:
            table = img.quant_tables[c.tq]
        except KeyError:
            raise JpegParseError(f"frame references missing quantization table {c.tq}") from None
        bh, bw = mcu_h * c.v, mcu_w * c.h
        quantized = dct.zigzag_unflatten(per_comp).reshape(bh, bw, 8, 8)
        freq = dct.dequantize(quantized, np.asarray(table, dtype=np.int32))
        spatial = dct.idct_interop(freq)
        if ci == 0 and hooks is not None and hooks.post_idct is not None:
            shifted = spatial.astype(np.int16) - 128
            for r in range(bh):
                for cc in range(bw):
                    hooks.post_idct(shifted[r, cc], r, cc)
        plane = _unblockify(spatial)
        comp_w = -(-img.width * c.h // max_h)
        comp_h = -(-img.height * c.v // max_v)
        planes.append(plane[:comp_h, :comp_w])

    if len(comps) == 1:
        y = planes[0][:img.height, :img.width]
        return np.repeat(y[..., None], 3, axis=2)

    y = planes[0][:img.height, :img.width]
    cb = color.upsample(planes[1], max_h // comps[1].h, max_v // comps[1].v,
                        img.height, img.width)
    cr = color.upsample(planes[2], max_h // comps[2].h, max_v // comps[2].v,
                        img.height, img.width)
    ycc = np.stack([y, cb, cr], axis=-1)
    return color.ycbcr_to_rgb(ycc)
