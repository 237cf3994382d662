"""Symmetric crypto and the self-describing payload envelope.

The envelope is the byte stream a viewer recovers from a protected image.
It carries everything needed to fetch the key and decrypt:

    magic   4 bytes   b"JEEV"
    version 1 byte    currently 1
    url_len 2 bytes   big-endian, nonzero
    url     n bytes   keyserver base URL, UTF-8
    key_id  16 bytes
    iv      16 bytes
    ct_len  4 bytes   big-endian, multiple of 16
    ct      ct_len bytes

The hash handed to the keyserver is SHA-256 of the ciphertext alone, which
survives recompression of the carrier image unchanged.
"""
from __future__ import annotations

import hashlib
import secrets
import struct
from dataclasses import dataclass

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes
from cryptography.hazmat.primitives import padding as _padding

from .errors import (DecryptError, EnvelopeFormatError, EnvelopeVersionError,
                     NotEnvelopeError)

ENVELOPE_MAGIC = b"JEEV"
ENVELOPE_VERSION = 1
KEY_BYTES = 32
IV_BYTES = 16
KEY_ID_BYTES = 16


def new_key() -> bytes:
    """Fresh 256-bit key from the OS secure source."""
    return secrets.token_bytes(KEY_BYTES)


def new_key_id() -> bytes:
    return secrets.token_bytes(KEY_ID_BYTES)


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def encrypt(key: bytes, plaintext: bytes, iv: bytes | None = None) -> tuple[bytes, bytes]:
    """AES-256-CBC with PKCS#7 padding; returns (iv, ciphertext).

    A fresh random IV is drawn unless one is supplied (tests use fixed IVs
    to check against published reference vectors).
    """
    if len(key) != KEY_BYTES:
        raise ValueError(f"key must be {KEY_BYTES} bytes")
    if iv is None:
        iv = secrets.token_bytes(IV_BYTES)
    elif len(iv) != IV_BYTES:
        raise ValueError(f"iv must be {IV_BYTES} bytes")
    padder = _padding.PKCS7(128).padder()
    padded = padder.update(plaintext) + padder.finalize()
    enc = Cipher(algorithms.AES(key), modes.CBC(iv)).encryptor()
    return iv, enc.update(padded) + enc.finalize()


def decrypt(key: bytes, iv: bytes, ciphertext: bytes) -> bytes:
    """Inverse of encrypt. Raises DecryptError for wrong key or corruption."""
    if len(key) != KEY_BYTES:
        raise ValueError(f"key must be {KEY_BYTES} bytes")
    if len(iv) != IV_BYTES:
        raise ValueError(f"iv must be {IV_BYTES} bytes")
    if len(ciphertext) == 0 or len(ciphertext) % 16:
        raise DecryptError("ciphertext length is not a positive multiple of 16")
    dec = Cipher(algorithms.AES(key), modes.CBC(iv)).decryptor()
    padded = dec.update(ciphertext) + dec.finalize()
    unpadder = _padding.PKCS7(128).unpadder()
    try:
        return unpadder.update(padded) + unpadder.finalize()
    except ValueError as exc:
        raise DecryptError("bad padding: wrong key or corrupted ciphertext") from exc


@dataclass(frozen=True)
class PayloadEnvelope:
    keyserver_url: str
    key_id: bytes
    iv: bytes
    ciphertext: bytes
    version: int = ENVELOPE_VERSION

    def __post_init__(self):
        if not self.keyserver_url:
            raise EnvelopeFormatError("keyserver URL must be nonempty")
        if len(self.keyserver_url.encode("utf-8")) > 0xFFFF:
            raise EnvelopeFormatError("keyserver URL too long")
        if len(self.key_id) != KEY_ID_BYTES:
            raise EnvelopeFormatError(f"key_id must be {KEY_ID_BYTES} bytes")
        if len(self.iv) != IV_BYTES:
            raise EnvelopeFormatError(f"iv must be {IV_BYTES} bytes")
        if len(self.ciphertext) == 0 or len(self.ciphertext) % 16:
            raise EnvelopeFormatError("ciphertext length must be a positive multiple of 16")


def build_envelope(env: PayloadEnvelope) -> bytes:
    url = env.keyserver_url.encode("utf-8")
    return b"".join([
        ENVELOPE_MAGIC,
        bytes([env.version]),
        struct.pack(">H", len(url)),
        url,
        env.key_id,
        env.iv,
        struct.pack(">I", len(env.ciphertext)),
        env.ciphertext,
    ])


def parse_envelope(data: bytes) -> PayloadEnvelope:
    if len(data) < 4 or data[:4] != ENVELOPE_MAGIC:
        raise NotEnvelopeError("missing envelope magic")
    if len(data) < 7:
        raise EnvelopeFormatError("envelope truncated")
    version = data[4]
    if version != ENVELOPE_VERSION:
        raise EnvelopeVersionError(f"unsupported envelope version {version}")
    url_len = struct.unpack(">H", data[5:7])[0]
    if url_len == 0:
        raise EnvelopeFormatError("keyserver URL must be nonempty")
    pos = 7
    if len(data) < pos + url_len + KEY_ID_BYTES + IV_BYTES + 4:
        raise EnvelopeFormatError("envelope truncated")
    try:
        url = data[pos:pos + url_len].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EnvelopeFormatError("keyserver URL is not valid UTF-8") from exc
    pos += url_len
    key_id = data[pos:pos + KEY_ID_BYTES]
    pos += KEY_ID_BYTES
    iv = data[pos:pos + IV_BYTES]
    pos += IV_BYTES
    ct_len = struct.unpack(">I", data[pos:pos + 4])[0]
    pos += 4
    if len(data) < pos + ct_len:
        raise EnvelopeFormatError("envelope ciphertext truncated")
    return PayloadEnvelope(keyserver_url=url, key_id=key_id, iv=iv,
                           ciphertext=data[pos:pos + ct_len], version=version)
