"""Baseline Huffman table definitions and canonical code assignment.

Default tables are the example tables from the JPEG standard (Annex K.3),
the same ones emitted by common encoders when optimization is off.
A table is described by (bits, values): bits[i] counts codes of length i+1,
values lists the coded symbols in canonical order.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

STD_DC_LUMA_BITS = (0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0)
STD_DC_LUMA_VALUES = tuple(range(12))

STD_DC_CHROMA_BITS = (0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0)
STD_DC_CHROMA_VALUES = tuple(range(12))

STD_AC_LUMA_BITS = (0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7D)
STD_AC_LUMA_VALUES = (
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06,
    0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08,
    0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0, 0x24, 0x33, 0x62, 0x72,
    0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
    0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45,
    0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
    0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74, 0x75,
    0x76, 0x77, 0x78, 0x79, 0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3,
    0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6,
    0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9,
    0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
    0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4,
    0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA,
)

STD_AC_CHROMA_BITS = (0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77)
STD_AC_CHROMA_VALUES = (
    0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41,
    0x51, 0x07, 0x61, 0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91,
    0xA1, 0xB1, 0xC1, 0x09, 0x23, 0x33, 0x52, 0xF0, 0x15, 0x62, 0x72, 0xD1,
    0x0A, 0x16, 0x24, 0x34, 0xE1, 0x25, 0xF1, 0x17, 0x18, 0x19, 0x1A, 0x26,
    0x27, 0x28, 0x29, 0x2A, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44,
    0x45, 0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58,
    0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74,
    0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87,
    0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A,
    0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4,
    0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7,
    0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA,
    0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF2, 0xF3, 0xF4,
    0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA,
)


@dataclass(frozen=True)
class HuffmanTable:
    """One Huffman table plus precomputed encode and decode lookups."""

    bits: tuple[int, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) != 16:
            raise ValueError("bits must have 16 entries")
        if sum(self.bits) != len(self.values):
            raise ValueError("bits totals do not match value count")

    def code_assignment(self) -> tuple[np.ndarray, np.ndarray]:
        """Canonical (code, size) per symbol index, per the standard's C.2."""
        sizes = []
        for length, count in enumerate(self.bits, start=1):
            sizes.extend([length] * count)
        codes = np.zeros(len(sizes), dtype=np.uint32)
        code = 0
        prev_size = sizes[0] if sizes else 0
        for i, size in enumerate(sizes):
            code <<= size - prev_size
            codes[i] = code
            code += 1
            prev_size = size
        return codes, np.asarray(sizes, dtype=np.uint8)

    @cached_property
    def encode_lut(self) -> tuple[np.ndarray, np.ndarray]:
        """Arrays mapping symbol byte -> (code, code length); length 0 = absent."""
        codes, sizes = self.code_assignment()
        code_by_sym = np.zeros(256, dtype=np.uint32)
        size_by_sym = np.zeros(256, dtype=np.uint8)
        for sym, code, size in zip(self.values, codes, sizes):
            code_by_sym[sym] = code
            size_by_sym[sym] = size
        return code_by_sym, size_by_sym

    @cached_property
    def decode_lut(self) -> tuple[np.ndarray, np.ndarray]:
        """65536-entry lookup: 16 peeked bits -> (symbol, code length); length 0 = invalid."""
        codes, sizes = self.code_assignment()
        sym_lut = np.zeros(65536, dtype=np.uint8)
        len_lut = np.zeros(65536, dtype=np.uint8)
        for sym, code, size in zip(self.values, codes, sizes):
            lo = int(code) << (16 - int(size))
            hi = lo + (1 << (16 - int(size)))
            sym_lut[lo:hi] = sym
            len_lut[lo:hi] = size
        return sym_lut, len_lut


STD_DC_LUMA = HuffmanTable(STD_DC_LUMA_BITS, STD_DC_LUMA_VALUES)
STD_DC_CHROMA = HuffmanTable(STD_DC_CHROMA_BITS, STD_DC_CHROMA_VALUES)
STD_AC_LUMA = HuffmanTable(STD_AC_LUMA_BITS, STD_AC_LUMA_VALUES)
STD_AC_CHROMA = HuffmanTable(STD_AC_CHROMA_BITS, STD_AC_CHROMA_VALUES)
