"""Baseline Huffman entropy coding of quantized coefficient blocks.

The hot loops are JIT-compiled; wrappers handle table preparation and error
reporting. Blocks are processed in scan (MCU-interleaved) order; the caller
supplies per-unit component and table indices, which keeps these kernels
independent of frame geometry.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from numba import njit

from .errors import EncodeRangeError, JpegParseError
from .hufftables import HuffmanTable

_STATUS_OK = 0
_STATUS_BAD_CODE = 1
_STATUS_TRUNCATED = 2
_STATUS_BAD_RESTART = 3
_STATUS_RANGE = 4


@njit(cache=True, inline="always")
def _flush_bytes(out, pos, acc, nbits):
    while nbits >= 8:
        byte = int((acc >> np.uint64(nbits - 8)) & np.uint64(0xFF))
        out[pos] = byte
        pos += 1
        if byte == 0xFF:
            out[pos] = 0
            pos += 1
        nbits -= 8
    return pos, nbits


@njit(cache=True)
def _encode_scan(coeff, comp_of_unit, dc_tbl_of_unit, ac_tbl_of_unit,
                 dc_code, dc_size, ac_code, ac_size,
                 restart_interval, units_per_mcu, out):
    n_units = coeff.shape[0]
    pred = np.zeros(4, dtype=np.int32)
    acc = np.uint64(0)
    nbits = 0
    pos = 0
    rst_index = 0
    mcu = 0

    for unit in range(n_units):
        if restart_interval > 0 and unit > 0 and unit % units_per_mcu == 0:
            mcu += 1
            if mcu % restart_interval == 0:
                if nbits > 0:  # pad to byte boundary with 1-bits
                    pad = 8 - nbits
                    byte = (int((acc << np.uint64(pad)) & np.uint64(0xFF))
                            | ((1 << pad) - 1))
                    out[pos] = byte
                    pos += 1
                    if byte == 0xFF:
                        out[pos] = 0
                        pos += 1
                    acc = np.uint64(0)
                    nbits = 0
                out[pos] = 0xFF
                out[pos + 1] = 0xD0 + rst_index
                pos += 2
                rst_index = (rst_index + 1) & 7
                pred[:] = 0

        comp = comp_of_unit[unit]
        dct = dc_tbl_of_unit[unit]
        act = ac_tbl_of_unit[unit]

        # DC difference
        dc = coeff[unit, 0]
        diff = dc - pred[comp]
        pred[comp] = dc
        mag = diff if diff >= 0 else -diff
        if mag > 2047:
            return _STATUS_RANGE, unit, pos
        cat = 0
        m = mag
        while m > 0:
            cat += 1
            m >>= 1
        size = dc_size[dct, cat]
        if size == 0:
            return _STATUS_BAD_CODE, unit, pos
        acc = (acc << np.uint64(size)) | np.uint64(dc_code[dct, cat])
        nbits += size
        if cat > 0:
            bits_val = diff if diff >= 0 else diff + (1 << cat) - 1
            acc = (acc << np.uint64(cat)) | np.uint64(bits_val)
            nbits += cat
        pos, nbits = _flush_bytes(out, pos, acc, nbits)

        # AC run-length coding
        run = 0
        for k in range(1, 64):
            v = coeff[unit, k]
            if v == 0:
                run += 1
                continue
            while run >= 16:
                size = ac_size[act, 0xF0]  # ZRL
                acc = (acc << np.uint64(size)) | np.uint64(ac_code[act, 0xF0])
                nbits += size
                pos, nbits = _flush_bytes(out, pos, acc, nbits)
                run -= 16
            mag = v if v >= 0 else -v
            if mag > 1023:
                return _STATUS_RANGE, unit, pos
            cat = 0
            m = mag
            while m > 0:
                cat += 1
                m >>= 1
            sym = (run << 4) | cat
            size = ac_size[act, sym]
            if size == 0:
                return _STATUS_BAD_CODE, unit, pos
            acc = (acc << np.uint64(size)) | np.uint64(ac_code[act, sym])
            nbits += size
            bits_val = v if v >= 0 else v + (1 << cat) - 1
            acc = (acc << np.uint64(cat)) | np.uint64(bits_val)
            nbits += cat
            run = 0
            pos, nbits = _flush_bytes(out, pos, acc, nbits)
        if run > 0:
            size = ac_size[act, 0x00]  # EOB
            acc = (acc << np.uint64(size)) | np.uint64(ac_code[act, 0x00])
            nbits += size
            pos, nbits = _flush_bytes(out, pos, acc, nbits)

    if nbits > 0:
        pad = 8 - nbits
        byte = int((acc << np.uint64(pad)) & np.uint64(0xFF)) | ((1 << pad) - 1)
        out[pos] = byte
        pos += 1
        if byte == 0xFF:
            out[pos] = 0
            pos += 1
    return _STATUS_OK, n_units, pos


@njit(cache=True, inline="always")
def _fill(data, pos, acc, nbits, avail, want):
    # Top up the accumulator to at least `want` bits. Bits past the end of
    # the segment are zero-filled and not counted in `avail`; consuming them
    # is how truncation is detected.
    n_data = data.shape[0]
    while nbits < want:
        if pos < n_data:
            b = data[pos]
            if b == 0xFF:
                if pos + 1 < n_data and data[pos + 1] == 0x00:
                    pos += 2  # stuffed literal 0xFF
                else:
                    acc = acc << np.uint64(8)  # marker ahead: stop consuming
                    nbits += 8
                    continue
            else:
                pos += 1
            acc = (acc << np.uint64(8)) | np.uint64(b)
            nbits += 8
            avail += 8
        else:
            acc = acc << np.uint64(8)
            nbits += 8
    return pos, acc, nbits, avail


@njit(cache=True)
def _decode_scan(data, comp_of_unit, dc_tbl_of_unit, ac_tbl_of_unit,
                 dc_sym, dc_len, ac_sym, ac_len,
                 restart_interval, units_per_mcu, out):
    n_units = out.shape[0]
    n_data = data.shape[0]
    pred = np.zeros(4, dtype=np.int32)
    acc = np.uint64(0)
    nbits = 0
    avail = 0
    pos = 0
    mcu = 0

    for unit in range(n_units):
        if restart_interval > 0 and unit > 0 and unit % units_per_mcu == 0:
            mcu += 1
            if mcu % restart_interval == 0:
                acc = np.uint64(0)  # discard padding bits
                nbits = 0
                avail = 0
                if pos + 1 >= n_data:
                    return _STATUS_TRUNCATED, pos, unit
                if data[pos] != 0xFF or not (0xD0 <= data[pos + 1] <= 0xD7):
                    return _STATUS_BAD_RESTART, pos, unit
                pos += 2
                pred[:] = 0

        comp = comp_of_unit[unit]
        dct = dc_tbl_of_unit[unit]
        act = ac_tbl_of_unit[unit]

        # DC coefficient
        pos, acc, nbits, avail = _fill(data, pos, acc, nbits, avail, 16)
        peek = int((acc >> np.uint64(nbits - 16)) & np.uint64(0xFFFF))
        cat = dc_sym[dct, peek]
        clen = dc_len[dct, peek]
        if clen == 0:
            return _STATUS_BAD_CODE, pos, unit
        nbits -= clen
        avail -= clen
        if avail < 0:
            return _STATUS_TRUNCATED, pos, unit
        diff = 0
        if cat > 0:
            pos, acc, nbits, avail = _fill(data, pos, acc, nbits, avail, cat)
            bits_val = int((acc >> np.uint64(nbits - cat)) & np.uint64((1 << cat) - 1))
            nbits -= cat
            avail -= cat
            if avail < 0:
                return _STATUS_TRUNCATED, pos, unit
            if bits_val < (1 << (cat - 1)):
                diff = bits_val - ((1 << cat) - 1)
            else:
                diff = bits_val
        pred[comp] += diff
        out[unit, 0] = pred[comp]

        # AC coefficients
        k = 1
        while k < 64:
            pos, acc, nbits, avail = _fill(data, pos, acc, nbits, avail, 16)
            peek = int((acc >> np.uint64(nbits - 16)) & np.uint64(0xFFFF))
            sym = ac_sym[act, peek]
            clen = ac_len[act, peek]
            if clen == 0:
                return _STATUS_BAD_CODE, pos, unit
            nbits -= clen
            avail -= clen
            if avail < 0:
                return _STATUS_TRUNCATED, pos, unit
            run = sym >> 4
            cat = sym & 0x0F
            if cat == 0:
                if run == 15:
                    k += 16
                    continue
                break  # EOB
            k += run
            if k > 63:
                return _STATUS_BAD_CODE, pos, unit
            pos, acc, nbits, avail = _fill(data, pos, acc, nbits, avail, cat)
            bits_val = int((acc >> np.uint64(nbits - cat)) & np.uint64((1 << cat) - 1))
            nbits -= cat
            avail -= cat
            if avail < 0:
                return _STATUS_TRUNCATED, pos, unit
            if bits_val < (1 << (cat - 1)):
                out[unit, k] = bits_val - ((1 << cat) - 1)
            else:
                out[unit, k] = bits_val
            k += 1

    return _STATUS_OK, pos, n_units


@lru_cache(maxsize=32)
def _stack_encode_tables(tables: tuple[HuffmanTable, ...]) -> tuple[np.ndarray, np.ndarray]:
    codes = np.zeros((len(tables), 256), dtype=np.uint32)
    sizes = np.zeros((len(tables), 256), dtype=np.uint8)
    for i, t in enumerate(tables):
        codes[i], sizes[i] = t.encode_lut
    return codes, sizes


@lru_cache(maxsize=32)
def _stack_decode_tables(tables: tuple[HuffmanTable, ...]) -> tuple[np.ndarray, np.ndarray]:
    syms = np.zeros((len(tables), 65536), dtype=np.uint8)
    lens = np.zeros((len(tables), 65536), dtype=np.uint8)
    for i, t in enumerate(tables):
        syms[i], lens[i] = t.decode_lut
    return syms, lens


def encode_scan(coeff: np.ndarray, comp_of_unit: np.ndarray,
                dc_tbl_of_unit: np.ndarray, ac_tbl_of_unit: np.ndarray,
                dc_tables: list[HuffmanTable], ac_tables: list[HuffmanTable],
                restart_interval: int = 0, units_per_mcu: int = 1) -> bytes:
    """Entropy-encode zig-zag blocks (n_units, 64) into stuffed scan bytes."""
    n_units = coeff.shape[0]
    dc_code, dc_size = _stack_encode_tables(tuple(dc_tables))
    ac_code, ac_size = _stack_encode_tables(tuple(ac_tables))
    # worst case ~26 bits per coefficient, doubled for byte stuffing
    out = np.empty(max(64, n_units * 448), dtype=np.uint8)
    status, where, length = _encode_scan(
        np.ascontiguousarray(coeff, dtype=np.int32),
        np.ascontiguousarray(comp_of_unit, dtype=np.uint8),
        np.ascontiguousarray(dc_tbl_of_unit, dtype=np.uint8),
        np.ascontiguousarray(ac_tbl_of_unit, dtype=np.uint8),
        dc_code, dc_size, ac_code, ac_size,
        restart_interval, units_per_mcu, out)
    if status == _STATUS_RANGE:
        raise EncodeRangeError(f"coefficient magnitude exceeds baseline range in block {where}")
    if status != _STATUS_OK:
        raise EncodeRangeError(f"symbol not encodable with the supplied tables (block {where})")
    return out[:length].tobytes()


def decode_scan(data: bytes, n_units: int, comp_of_unit: np.ndarray,
                dc_tbl_of_unit: np.ndarray, ac_tbl_of_unit: np.ndarray,
                dc_tables: list[HuffmanTable], ac_tables: list[HuffmanTable],
                restart_interval: int = 0, units_per_mcu: int = 1) -> np.ndarray:
    """Decode stuffed scan bytes into zig-zag blocks (n_units, 64), int16."""
    dc_sym, dc_len = _stack_decode_tables(tuple(dc_tables))
    ac_sym, ac_len = _stack_decode_tables(tuple(ac_tables))
    out = np.zeros((n_units, 64), dtype=np.int16)
    status, offset, where = _decode_scan(
        np.frombuffer(data, dtype=np.uint8),
        np.ascontiguousarray(comp_of_unit, dtype=np.uint8),
        np.ascontiguousarray(dc_tbl_of_unit, dtype=np.uint8),
        np.ascontiguousarray(ac_tbl_of_unit, dtype=np.uint8),
        dc_sym, dc_len, ac_sym, ac_len,
        restart_interval, units_per_mcu, out)
    if status == _STATUS_BAD_CODE:
        raise JpegParseError(f"invalid Huffman code in block {where}", offset=offset)
    if status == _STATUS_TRUNCATED:
        raise JpegParseError(f"entropy-coded data truncated in block {where}", offset=offset)
    if status == _STATUS_BAD_RESTART:
        raise JpegParseError(f"missing restart marker before block {where}", offset=offset)
    return out
