"""Site profiles: how a hosting service recompresses uploaded JPEGs.

A profile captures maximum dimensions, the quantization tables applied on
re-encode, chroma subsampling, and whether header metadata is stripped.
Profiles can also be loaded from a JSON file so new services are supported
without code changes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dct import validate_quant_table

# Luminance table used by the largest supported service (peak divisor 36).
FACEBOOK_LUMA_QUANT = np.array([
    [5,  3,  3,  5,  7, 12, 15, 18],
    [4,  4,  4,  6,  8, 17, 18, 17],
    [4,  4,  5,  7, 12, 17, 21, 17],
    [4,  5,  7,  9, 15, 26, 24, 19],
    [5,  7, 11, 17, 20, 33, 31, 23],
    [7, 11, 17, 19, 24, 31, 34, 28],
    [15, 19, 23, 26, 31, 36, 36, 30],
    [22, 28, 29, 29, 34, 30, 31, 30]], dtype=np.int32)

# JPEG standard example chrominance table; profiles fall back to it because
# services publish (via their output files) mainly the luminance table.
STD_CHROMA_QUANT = np.array([
    [17, 18, 24, 47, 99, 99, 99, 99],
    [18, 21, 26, 66, 99, 99, 99, 99],
    [24, 26, 56, 99, 99, 99, 99, 99],
    [47, 66, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99]], dtype=np.int32)

# JPEG standard example luminance table, used when re-encoding source
# images before encryption (quality normalization, not site emulation).
STD_LUMA_QUANT = np.array([
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99]], dtype=np.int32)


@dataclass(frozen=True)
class SiteProfile:
    name: str
    max_width: int
    max_height: int
    luma_quant: np.ndarray
    chroma_quant: np.ndarray
    chroma_subsampling: str = "420"
    strip_metadata: bool = True

    def __post_init__(self):
        validate_quant_table(self.luma_quant)
        validate_quant_table(self.chroma_quant)
        if self.chroma_subsampling not in ("420", "444"):
            raise ValueError("chroma_subsampling must be '420' or '444'")


# The two smaller services reuse the published luminance table; only their
# maximum resolutions differ (their own tables are not public).
BUILTIN_PROFILES = {
    "facebook": SiteProfile("facebook", 720, 720,
                            FACEBOOK_LUMA_QUANT, STD_CHROMA_QUANT),
    "flickr": SiteProfile("flickr", 1024, 1024,
                          FACEBOOK_LUMA_QUANT, STD_CHROMA_QUANT),
    "wer-kennt-wen": SiteProfile("wer-kennt-wen", 620, 620,
                                 FACEBOOK_LUMA_QUANT, STD_CHROMA_QUANT),
}


def get_profile(name: str, extra: dict[str, SiteProfile] | None = None) -> SiteProfile:
    if extra and name in extra:
        return extra[name]
    try:
        return BUILTIN_PROFILES[name]
    except KeyError:
        known = sorted(BUILTIN_PROFILES) + sorted(extra or ())
        raise KeyError(f"unknown site profile {name!r}; known: {', '.join(known)}") from None


def _table_from_json(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int64)
    if arr.size != 64:
        raise ValueError("quantization table needs 64 values")
    return validate_quant_table(arr.reshape(8, 8))


def load_profiles(path: str | Path) -> dict[str, SiteProfile]:
    """Read extra profiles from a JSON file (list of profile objects)."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if isinstance(raw, dict):
        raw = [raw]
    out = {}
    for item in raw:
        profile = SiteProfile(
            name=item["name"],
            max_width=int(item["max_width"]),
            max_height=int(item["max_height"]),
            luma_quant=_table_from_json(item["luma_quant"]),
            chroma_quant=(_table_from_json(item["chroma_quant"])
                          if "chroma_quant" in item else STD_CHROMA_QUANT),
            chroma_subsampling=item.get("chroma_subsampling", "420"),
            strip_metadata=bool(item.get("strip_metadata", True)),
        )
        out[profile.name] = profile
    return out
