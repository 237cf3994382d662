"""Centralized keyserver: publishing, viewing, and update phases."""

from .service import KeyService, KeyRecord, ArithmeticCaptcha, TokenBucketLimiter
from .store import KeyStore
from .config import ServerConfig, load_config

__all__ = [
    "KeyService", "KeyRecord", "ArithmeticCaptcha", "TokenBucketLimiter",
    "KeyStore", "ServerConfig", "load_config",
]
