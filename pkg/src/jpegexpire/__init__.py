"""Expiring JPEG images.

Encrypt an image, embed the ciphertext in a cover JPEG so it survives
social-network-style recompression, and serve the decryption key from a
keyserver only until the chosen expiration date.

Typical library use::

    from jpegexpire import publish, view
    from jpegexpire.profiles import BUILTIN_PROFILES

The codec, embedding, error-correction, and crypto layers are importable on
their own (jpegexpire.codec, .stego, .rs, .envelope); the keyserver lives in
jpegexpire.keyserver.
"""

from . import errors
from .codec import CodecHooks, decode, encode
from .envelope import (PayloadEnvelope, build_envelope, decrypt, encrypt,
                       new_key, parse_envelope, sha256)
from .jfif import JfifImage, parse_jfif, serialize_jfif
from .profiles import BUILTIN_PROFILES, SiteProfile, get_profile, load_profiles
from .publish import (PublishJob, PublishResult, ViewResult, publish,
                      view_bytes)
from .recompress import (cancellation_experiment, inverse_quantization_table,
                         measure_ber, recompress)
from .rs import rs_decode, rs_decode_stream, rs_encode, rs_encode_stream
from .stego import (Capacity, EmbedMode, compute_capacity, decode_symbol,
                    detect_protected, embed_bits, embed_header, encode_symbol,
                    extract_bits, extract_header, make_container)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "CodecHooks", "decode", "encode",
    "PayloadEnvelope", "build_envelope", "decrypt", "encrypt", "new_key",
    "parse_envelope", "sha256",
    "JfifImage", "parse_jfif", "serialize_jfif",
    "BUILTIN_PROFILES", "SiteProfile", "get_profile", "load_profiles",
    "PublishJob", "PublishResult", "ViewResult", "publish", "view_bytes",
    "cancellation_experiment", "inverse_quantization_table", "measure_ber",
    "recompress",
    "rs_decode", "rs_decode_stream", "rs_encode", "rs_encode_stream",
    "Capacity", "EmbedMode", "compute_capacity", "decode_symbol",
    "detect_protected", "embed_bits", "embed_header", "encode_symbol",
    "extract_bits", "extract_header", "make_container",
]
