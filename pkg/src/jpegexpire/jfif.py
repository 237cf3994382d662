"""JFIF container: marker-segment parsing and serialization.

Only baseline sequential Huffman files are accepted. Application and comment
segments are preserved verbatim; comment payloads round-trip byte-exactly.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .dct import ZIGZAG
from .errors import JpegParseError, UnsupportedModeError
from .hufftables import HuffmanTable

SOI = 0xD8
EOI = 0xD9
SOS = 0xDA
DQT = 0xDB
DHT = 0xC4
SOF0 = 0xC0
SOF1 = 0xC1
DRI = 0xDD
COM = 0xFE
APP0 = 0xE0

_SOF_UNSUPPORTED = {
    0xC2: "progressive DCT",
    0xC3: "lossless sequential",
    0xC5: "differential sequential",
    0xC6: "differential progressive",
    0xC7: "differential lossless",
    0xC9: "arithmetic sequential",
    0xCA: "arithmetic progressive",
    0xCB: "arithmetic lossless",
    0xCD: "differential arithmetic sequential",
    0xCE: "differential arithmetic progressive",
    0xCF: "differential arithmetic lossless",
}

MAX_COMMENT_PAYLOAD = 65533  # segment length field is 16 bits and counts itself


@dataclass
class ComponentSpec:
    ident: int
    h: int                    # horizontal sampling factor
    v: int                    # vertical sampling factor
    tq: int                   # quantization table id
    td: int = 0               # DC huffman table id (from SOS)
    ta: int = 0               # AC huffman table id (from SOS)


@dataclass
class JfifImage:
    """Parsed JFIF file: tables, frame header, headers, and the coded scan."""

    width: int
    height: int
    components: list[ComponentSpec]
    quant_tables: dict[int, np.ndarray]
    huffman_tables: dict[tuple[str, int], HuffmanTable]
    scan_data: bytes
    comments: list[bytes] = field(default_factory=list)
    app_segments: list[tuple[int, bytes]] = field(default_factory=list)
    restart_interval: int = 0

    @property
    def luma_quant(self) -> np.ndarray:
        return self.quant_tables[self.components[0].tq]

    @property
    def chroma_quant(self) -> np.ndarray:
        tq = self.components[1].tq if len(self.components) > 1 else self.components[0].tq
        return self.quant_tables[tq]

    @property
    def subsampling(self) -> str:
        """'444', '420', '422', or 'other' based on luma sampling factors."""
        if len(self.components) == 1:
            return "444"
        h, v = self.components[0].h, self.components[0].v
        if (h, v) == (1, 1):
            return "444"
        if (h, v) == (2, 2):
            return "420"
        if (h, v) == (2, 1):
            return "422"
        return "other"


def _u16(data: bytes, pos: int) -> int:
    if pos + 2 > len(data):
        raise JpegParseError("unexpected end of file", offset=pos)
    return (data[pos] << 8) | data[pos + 1]


def parse_jfif(data: bytes) -> JfifImage:
    """Parse a baseline JFIF byte stream into its structural parts."""
    if len(data) < 4 or data[0] != 0xFF or data[1] != SOI:
        raise JpegParseError("missing SOI marker", offset=0)
    pos = 2

    quant_tables: dict[int, np.ndarray] = {}
    huffman: dict[tuple[str, int], HuffmanTable] = {}
    comments: list[bytes] = []
    apps: list[tuple[int, bytes]] = []
    restart_interval = 0
    frame: tuple[int, int, list[ComponentSpec]] | None = None
    scan_data: bytes | None = None
    components: list[ComponentSpec] = []

    while True:
        if pos >= len(data):
            raise JpegParseError("missing EOI marker", offset=pos)
        if data[pos] != 0xFF:
            raise JpegParseError(f"expected marker, found 0x{data[pos]:02X}", offset=pos)
        while pos < len(data) and data[pos] == 0xFF:
            pos += 1  # fill bytes
        if pos >= len(data):
            raise JpegParseError("truncated marker", offset=pos)
        marker = data[pos]
        pos += 1

        if marker == EOI:
            break
        if marker in _SOF_UNSUPPORTED:
            raise UnsupportedModeError(f"unsupported JPEG mode: {_SOF_UNSUPPORTED[marker]}")

        length = _u16(data, pos)
        if length < 2 or pos + length > len(data):
            raise JpegParseError("bad segment length", offset=pos)
        body = data[pos + 2:pos + length]
        pos += length

        if marker == DQT:
            i = 0
            while i < len(body):
                pq, tq = body[i] >> 4, body[i] & 0x0F
                i += 1
                if pq == 0:
                    raw = np.frombuffer(body[i:i + 64], dtype=np.uint8)
                    i += 64
                else:
                    raw = np.frombuffer(body[i:i + 128], dtype=">u2")
                    i += 128
                if raw.size != 64:
                    raise JpegParseError("truncated quantization table", offset=pos)
                table = np.zeros(64, dtype=np.int32)
                table[ZIGZAG] = raw
                quant_tables[tq] = table.reshape(8, 8)
        elif marker == DHT:
            i = 0
            while i < len(body):
                tc, th = body[i] >> 4, body[i] & 0x0F
                counts = tuple(body[i + 1:i + 17])
                if len(counts) != 16:
                    raise JpegParseError("truncated Huffman table header", offset=pos)
                total = sum(counts)
                values = tuple(body[i + 17:i + 17 + total])
                if len(values) != total:
                    raise JpegParseError("truncated Huffman table values", offset=pos)
                huffman[("dc" if tc == 0 else "ac", th)] = HuffmanTable(counts, values)
                i += 17 + total
        elif marker in (SOF0, SOF1):
            if frame is not None:
                raise JpegParseError("multiple frame headers", offset=pos)
            precision = body[0]
            if precision != 8:
                raise UnsupportedModeError(f"unsupported sample precision {precision}")
            height = struct.unpack(">H", body[1:3])[0]
            width = struct.unpack(">H", body[3:5])[0]
            ncomp = body[5]
            if ncomp not in (1, 3):
                raise UnsupportedModeError(f"unsupported component count {ncomp}")
            comps = []
            for c in range(ncomp):
                ident = body[6 + 3 * c]
                hv = body[7 + 3 * c]
                comps.append(ComponentSpec(ident, hv >> 4, hv & 0x0F, body[8 + 3 * c]))
            for c in comps:
                if c.h not in (1, 2) or c.v not in (1, 2):
                    raise UnsupportedModeError(f"unsupported sampling factors {c.h}x{c.v}")
            frame = (width, height, comps)
        elif marker == DRI:
            restart_interval = struct.unpack(">H", body[:2])[0]
        elif marker == COM:
            comments.append(bytes(body))
        elif 0xE0 <= marker <= 0xEF:
            apps.append((marker, bytes(body)))
        elif marker == SOS:
            if frame is None:
                raise JpegParseError("scan before frame header", offset=pos)
            if scan_data is not None:
                raise UnsupportedModeError("multiple scans are not baseline")
            ncomp = body[0]
            width, height, components = frame
            if ncomp != len(components):
                raise UnsupportedModeError("partial-component scans are not baseline")
            by_id = {c.ident: c for c in components}
            for c in range(ncomp):
                ident = body[1 + 2 * c]
                tsel = body[2 + 2 * c]
                if ident not in by_id:
                    raise JpegParseError("scan references unknown component", offset=pos)
                by_id[ident].td = tsel >> 4
                by_id[ident].ta = tsel & 0x0F
            # entropy-coded bytes run until the next non-RST marker
            start = pos
            while True:
                ff = data.find(b"\xff", pos)
                if ff < 0 or ff + 1 >= len(data):
                    raise JpegParseError("scan data not terminated", offset=len(data))
                nxt = data[ff + 1]
                if nxt == 0x00 or 0xD0 <= nxt <= 0xD7:
                    pos = ff + 2
                    continue
                pos = ff
                break
            scan_data = data[start:pos]
        # unknown markers with a length field are skipped silently

    if frame is None or scan_data is None:
        raise JpegParseError("file has no image data", offset=pos)
    width, height, components = frame
    return JfifImage(
        width=width, height=height, components=components,
        quant_tables=quant_tables, huffman_tables=huffman,
        scan_data=scan_data, comments=comments, app_segments=apps,
        restart_interval=restart_interval)


def _segment(marker: int, body: bytes) -> bytes:
    if len(body) + 2 > 0xFFFF:
        raise ValueError("segment body too long")
    return bytes([0xFF, marker]) + struct.pack(">H", len(body) + 2) + body


def serialize_jfif(img: JfifImage) -> bytes:
    """Serialize back to a standard JFIF byte stream."""
    out = [b"\xff\xd8"]

    has_app0 = any(m == APP0 for m, _ in img.app_segments)
    if not has_app0:
        out.append(_segment(APP0, b"JFIF\x00\x01\x01\x00\x00\x01\x00\x01\x00\x00"))
    for marker, body in img.app_segments:
        out.append(_segment(marker, body))

    for tq in sorted(img.quant_tables):
        table = np.asarray(img.quant_tables[tq])
        zz = table.reshape(64)[ZIGZAG]
        if zz.max() > 255:
            body = bytes([0x10 | tq]) + np.asarray(zz, dtype=">u2").tobytes()
        else:
            body = bytes([tq]) + np.asarray(zz, dtype=np.uint8).tobytes()
        out.append(_segment(DQT, body))

    sof = bytearray([8])
    sof += struct.pack(">HH", img.height, img.width)
    sof.append(len(img.components))
    for c in img.components:
        sof += bytes([c.ident, (c.h << 4) | c.v, c.tq])
    out.append(_segment(SOF0, bytes(sof)))

    for (cls, th) in sorted(img.huffman_tables, key=lambda k: (k[1], k[0])):
        t = img.huffman_tables[(cls, th)]
        tc = 0 if cls == "dc" else 1
        body = bytes([(tc << 4) | th]) + bytes(t.bits) + bytes(t.values)
        out.append(_segment(DHT, body))

    if img.restart_interval:
        out.append(_segment(DRI, struct.pack(">H", img.restart_interval)))

    for comment in img.comments:
        if len(comment) > MAX_COMMENT_PAYLOAD:
            raise ValueError("comment segment exceeds 65533 bytes")
        out.append(_segment(COM, comment))

    sos = bytearray([len(img.components)])
    for c in img.components:
        sos += bytes([c.ident, (c.td << 4) | c.ta])
    sos += bytes([0, 63, 0])  # full spectral selection, no successive approx
    out.append(_segment(SOS, bytes(sos)))
    out.append(img.scan_data)
    out.append(b"\xff\xd9")
    return b"".join(out)
