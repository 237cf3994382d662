"""Durable storage for accounts and key records.

SQLite in WAL mode, written through on every mutation; the service keeps the
live working set in memory and reloads it on startup, so reads never touch
the database on the request path. Key bytes are encrypted at rest under a
server master key.
"""
from __future__ import annotations

import base64
import hashlib
import sqlite3
import threading
from dataclasses import dataclass

from cryptography.fernet import Fernet, InvalidToken

from ..errors import KeyserverError

_SCHEMA = """
CREATE TABLE IF NOT EXISTS accounts (
    username    TEXT PRIMARY KEY,
    salt        BLOB NOT NULL,
    pw_hash     BLOB NOT NULL,
    iterations  INTEGER NOT NULL,
    created_at  REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS records (
    key_id          BLOB PRIMARY KEY,
    key_enc         BLOB NOT NULL,
    expdate         REAL,
    ciphertext_hash BLOB NOT NULL,
    description     TEXT NOT NULL,
    created_at      REAL NOT NULL,
    captcha         INTEGER NOT NULL,
    owner           TEXT NOT NULL
);
"""


@dataclass
class StoredAccount:
    username: str
    salt: bytes
    pw_hash: bytes
    iterations: int
    created_at: float


@dataclass
class StoredRecord:
    key_id: bytes
    key: bytes
    expdate: float | None
    ciphertext_hash: bytes
    description: str
    created_at: float
    captcha_required: bool
    owner: str


class KeyStore:
    """Write-through persistent store; safe for use from many threads."""

    def __init__(self, path: str = ":memory:", master_key: bytes | str = b""):
        if isinstance(master_key, str):
            master_key = master_key.encode("utf-8")
        fkey = base64.urlsafe_b64encode(hashlib.sha256(b"key-at-rest:" + master_key).digest())
        self._fernet = Fernet(fkey)
        self._lock = threading.Lock()
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._conn.execute("PRAGMA synchronous=NORMAL")
        self._conn.executescript(_SCHEMA)
        self._conn.commit()

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # --- accounts ---

    def put_account(self, acct: StoredAccount) -> None:
        with self._lock:
            self._conn.execute(
                "INSERT INTO accounts VALUES (?,?,?,?,?)",
                (acct.username, acct.salt, acct.pw_hash, acct.iterations, acct.created_at))
            self._conn.commit()

    def load_accounts(self) -> dict[str, StoredAccount]:
        with self._lock:
            rows = self._conn.execute("SELECT * FROM accounts").fetchall()
        return {r[0]: StoredAccount(*r) for r in rows}

    # --- key records ---

    def put_record(self, rec: StoredRecord) -> None:
        enc = self._fernet.encrypt(rec.key)
        with self._lock:
            self._conn.execute(
                "INSERT INTO records VALUES (?,?,?,?,?,?,?,?)",
                (rec.key_id, enc, rec.expdate, rec.ciphertext_hash,
                 rec.description, rec.created_at, int(rec.captcha_required), rec.owner))
            self._conn.commit()

    def update_expdate(self, key_id: bytes, expdate: float | None) -> None:
        with self._lock:
            self._conn.execute(
                "UPDATE records SET expdate=? WHERE key_id=?", (expdate, key_id))
            self._conn.commit()

    def load_records(self) -> dict[bytes, StoredRecord]:
        with self._lock:
            rows = self._conn.execute("SELECT * FROM records").fetchall()
        out = {}
        for key_id, enc, expdate, chash, desc, created, captcha, owner in rows:
            try:
                key = self._fernet.decrypt(enc)
            except InvalidToken as exc:
                raise KeyserverError("stored key undecryptable: wrong master key?") from exc
            out[bytes(key_id)] = StoredRecord(
                key_id=bytes(key_id), key=key, expdate=expdate,
                ciphertext_hash=bytes(chash), description=desc,
                created_at=created, captcha_required=bool(captcha), owner=owner)
        return out
