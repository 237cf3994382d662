"""Expiration date parsing shared by the HTTP layer and the CLI."""
from __future__ import annotations

import datetime as _dt

from .errors import InvalidDateError


def parse_expiry(value: str | float | None) -> float | None:
    """RFC 3339 timestamp, epoch seconds, or null for no expiration."""
    if value is None:
        return None
    if isinstance(value, (int, float)):
        return float(value)
    text = value.strip()
    if text.lower() in ("", "none", "never"):
        return None
    try:
        dt = _dt.datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise InvalidDateError(f"cannot parse expiration date {value!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=_dt.timezone.utc)
    return dt.timestamp()


def format_expiry(epoch: float | None) -> str:
    if epoch is None:
        return "never"
    return _dt.datetime.fromtimestamp(epoch, _dt.timezone.utc).isoformat()
