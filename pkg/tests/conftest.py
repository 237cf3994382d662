from __future__ import annotations

import io

import numpy as np
import pytest
from PIL import Image

from jpegexpire.keyserver import KeyService, KeyStore
from jpegexpire.keyserver.client import LocalKeyserverClient


def synthetic_photo(width: int, height: int, seed: int = 0) -> np.ndarray:
    """Photo-like content: smooth gradients, shapes, and mild sensor noise."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    r = 120 + 80 * np.sin(xx / 37.0) + 30 * np.cos(yy / 23.0)
    g = 100 + 90 * np.cos((xx + yy) / 53.0)
    b = 128 + 100 * np.sin(yy / 41.0) * np.cos(xx / 61.0)
    img = np.stack([r, g, b], axis=-1)
    cx, cy = width * 0.6, height * 0.4
    disc = ((xx - cx) ** 2 + (yy - cy) ** 2) < (min(width, height) * 0.2) ** 2
    img[disc] = [210, 180, 60]
    img += rng.normal(0, 6, img.shape)
    return img.clip(0, 255).astype(np.uint8)


def pillow_jpeg(img: np.ndarray, quality: int = 85, subsampling: int = 0,
                **kwargs) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(img).save(buf, "JPEG", quality=quality,
                              subsampling=subsampling, **kwargs)
    return buf.getvalue()


def pillow_decode(data: bytes) -> np.ndarray:
    return np.asarray(Image.open(io.BytesIO(data)).convert("RGB"))


@pytest.fixture()
def photo_257x318() -> np.ndarray:
    return synthetic_photo(318, 257, seed=42)


class FakeClock:
    """Manually advanced clock for expiry tests."""

    def __init__(self, start: float = 1_000_000.0):
        self.now = start

    def __call__(self) -> float:
        return self.now

    def advance(self, seconds: float) -> None:
        self.now += seconds


@pytest.fixture()
def fake_clock() -> FakeClock:
    return FakeClock()


@pytest.fixture()
def service(fake_clock) -> KeyService:
    svc = KeyService(KeyStore(":memory:"), clock=fake_clock,
                     pbkdf2_iterations=500,
                     getkey_rate_per_min=1e9, getkey_range_rate_per_min=1e9,
                     createkey_rate_per_min=1e9)
    svc.register("alice", "correct horse")
    return svc


@pytest.fixture()
def local_client(service) -> LocalKeyserverClient:
    return LocalKeyserverClient(service)
