"""Server configuration: JSON file plus environment overrides.

Every field can come from the config file; environment variables named
KEYSRV_<FIELD> (upper case) override the file. The master key encrypts key
bytes at rest; when unset, one is generated next to the store and reused.
"""
from __future__ import annotations

import json
import os
import secrets
from dataclasses import dataclass, fields
from pathlib import Path


@dataclass
class ServerConfig:
    bind_host: str = "127.0.0.1"
    bind_port: int = 8750
    store_path: str = "keyserver.db"
    master_key: str = ""
    session_ttl: float = 900.0
    token_ttl: float = 3600.0
    captcha_ttl: float = 300.0
    captcha_cache_ttl: float = 3600.0
    pbkdf2_iterations: int = 60_000
    getkey_rate_per_min: float = 60.0
    getkey_range_rate_per_min: float = 600.0
    createkey_rate_per_min: float = 120.0
    allow_registration: bool = True


def load_config(path: str | Path | None = None) -> ServerConfig:
    cfg = ServerConfig()
    data: dict = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    for f in fields(ServerConfig):
        if f.name in data:
            setattr(cfg, f.name, _cast(getattr(cfg, f.name), data[f.name]))
        env = os.environ.get(f"KEYSRV_{f.name.upper()}")
        if env is not None:
            setattr(cfg, f.name, _cast(getattr(cfg, f.name), env))
    if not cfg.master_key:
        cfg.master_key = _ensure_master_key(cfg.store_path)
    return cfg


def _cast(default, value):
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        return str(value).strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, int) and not isinstance(default, bool):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return str(value)


def _ensure_master_key(store_path: str) -> str:
    """Generate and persist a random master key next to the store."""
    if store_path == ":memory:":
        return secrets.token_hex(32)
    keyfile = Path(store_path).with_suffix(".master")
    if keyfile.exists():
        return keyfile.read_text(encoding="utf-8").strip()
    key = secrets.token_hex(32)
    keyfile.write_text(key + "\n", encoding="utf-8")
    try:
        keyfile.chmod(0o600)
    except OSError:
        pass
    return key
