"""Core keyserver logic, independent of the HTTP transport.

The clock is injected so expiry behavior is testable without sleeping. All
request-path operations take one clock reading and hold the service lock
from check to response, so a key can never be released once its expiration
is at or before the observed time.
"""
from __future__ import annotations

import hashlib
import hmac
import secrets
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol

from ..errors import (AuthError, CaptchaRequiredError, HashMismatchError,
                      InvalidDateError, NotOwnerError, RateLimitedError,
                      RecordExpiredError, RecordNotFoundError,
                      SessionExpiredError)
from .store import KeyStore, StoredAccount, StoredRecord

Clock = Callable[[], float]

KeyRecord = StoredRecord  # public alias; the stored row is the record


@dataclass
class Session:
    session_id: str
    owner: str
    key: bytes
    created_at: float


@dataclass
class Challenge:
    challenge_id: str
    prompt: str
    solution: str
    created_at: float
    used: bool = False


class CaptchaProvider(Protocol):
    def new_challenge(self) -> tuple[str, str]:
        """Returns (prompt, solution)."""


class ArithmeticCaptcha:
    """Local stub provider: small addition questions."""

    def new_challenge(self) -> tuple[str, str]:
        a = secrets.randbelow(90) + 10
        b = secrets.randbelow(90) + 10
        return f"What is {a} + {b}?", str(a + b)


class TokenBucketLimiter:
    """Continuous-refill token bucket per key."""

    def __init__(self, rate_per_min: float, burst: float | None = None,
                 clock: Clock = time.monotonic, max_keys: int = 200_000):
        self.rate = rate_per_min / 60.0
        self.burst = burst if burst is not None else rate_per_min
        self._clock = clock
        self._buckets: dict[str, tuple[float, float]] = {}
        self._lock = threading.Lock()
        self._max_keys = max_keys

    def allow(self, key: str) -> bool:
        now = self._clock()
        with self._lock:
            tokens, last = self._buckets.get(key, (self.burst, now))
            tokens = min(self.burst, tokens + (now - last) * self.rate)
            if tokens < 1.0:
                self._buckets[key] = (tokens, now)
                return False
            if len(self._buckets) >= self._max_keys and key not in self._buckets:
                self._buckets.clear()  # crude pressure valve; buckets refill anyway
            self._buckets[key] = (tokens - 1.0, now)
            return True


def _range_of(source: str) -> str:
    """Aggregation key for a source address: /24 for IPv4, /64-ish otherwise."""
    if ":" in source:
        return ":".join(source.split(":")[:4])
    parts = source.split(".")
    if len(parts) == 4:
        return ".".join(parts[:3])
    return source


def _hash_password(password: str, salt: bytes, iterations: int) -> bytes:
    return hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations)


class KeyService:
    """Publishing, viewing, and update phases over a durable store."""

    def __init__(self, store: KeyStore | None = None, clock: Clock = time.time, *,
                 session_ttl: float = 900.0,
                 token_ttl: float = 3600.0,
                 captcha_ttl: float = 300.0,
                 captcha_cache_ttl: float = 3600.0,
                 pbkdf2_iterations: int = 60_000,
                 getkey_rate_per_min: float = 60.0,
                 getkey_range_rate_per_min: float = 600.0,
                 createkey_rate_per_min: float = 120.0,
                 captcha_provider: CaptchaProvider | None = None):
        self.store = store if store is not None else KeyStore(":memory:")
        self.clock = clock
        self.session_ttl = session_ttl
        self.token_ttl = token_ttl
        self.captcha_ttl = captcha_ttl
        self.captcha_cache_ttl = captcha_cache_ttl
        self.pbkdf2_iterations = pbkdf2_iterations
        self.captcha_provider = captcha_provider or ArithmeticCaptcha()

        self._lock = threading.RLock()
        self._records = self.store.load_records()
        self._accounts = self.store.load_accounts()
        self._sessions: dict[str, Session] = {}
        self._tokens: dict[str, tuple[str, float]] = {}
        self._challenges: dict[str, Challenge] = {}
        self._solved: dict[tuple[str, str, str], float] = {}
        self._cred_cache: dict[str, float] = {}

        self._limiters = {
            "getkey": TokenBucketLimiter(getkey_rate_per_min),
            "getkey-range": TokenBucketLimiter(getkey_range_rate_per_min),
            "createkey": TokenBucketLimiter(createkey_rate_per_min),
        }

    # --- accounts & sessions ---

    def register(self, username: str, password: str) -> None:
        if not username or not password:
            raise AuthError("username and password must be nonempty")
        with self._lock:
            if username in self._accounts:
                raise AuthError("account already exists")
            acct = StoredAccount(
                username=username,
                salt=secrets.token_bytes(16),
                pw_hash=b"",
                iterations=self.pbkdf2_iterations,
                created_at=self.clock(),
            )
            acct.pw_hash = _hash_password(password, acct.salt, acct.iterations)
            self.store.put_account(acct)
            self._accounts[username] = acct

    def _verify_credentials(self, username: str, password: str) -> str:
        with self._lock:
            acct = self._accounts.get(username)
        if acct is None:
            raise AuthError("unknown account")
        cache_key = hashlib.sha256(
            username.encode() + b"\x00" + password.encode() + acct.salt).hexdigest()
        now = self.clock()
        with self._lock:
            hit = self._cred_cache.get(cache_key)
            if hit is not None and now - hit < self.token_ttl:
                return username
        digest = _hash_password(password, acct.salt, acct.iterations)
        if not hmac.compare_digest(digest, acct.pw_hash):
            raise AuthError("wrong password")
        with self._lock:
            if len(self._cred_cache) > 10_000:
                self._cred_cache.clear()
            self._cred_cache[cache_key] = now
        return username

    def login(self, username: str, password: str) -> str:
        """Issue a bearer token for the management interface."""
        owner = self._verify_credentials(username, password)
        token = secrets.token_hex(16)
        with self._lock:
            self._tokens[token] = (owner, self.clock())
        return token

    def _owner_for_token(self, token: str) -> str:
        with self._lock:
            entry = self._tokens.get(token)
            if entry is None:
                raise AuthError("unknown or expired token")
            owner, issued = entry
            if self.clock() - issued >= self.token_ttl:
                del self._tokens[token]
                raise AuthError("unknown or expired token")
            return owner

    def resolve_owner(self, username: str | None = None, password: str | None = None,
                      token: str | None = None) -> str:
        if token:
            return self._owner_for_token(token)
        if username is not None and password is not None:
            return self._verify_credentials(username, password)
        raise AuthError("credentials required")

    # --- publishing phase ---

    def create_key(self, username: str, password: str) -> tuple[bytes, str]:
        """Mint a fresh key and session; nothing durable until add_hashes."""
        owner = self._verify_credentials(username, password)
        key = secrets.token_bytes(32)
        session_id = secrets.token_hex(16)
        with self._lock:
            self._purge_sessions_locked()
            self._sessions[session_id] = Session(session_id, owner, key, self.clock())
        return key, session_id

    def _purge_sessions_locked(self) -> None:
        if len(self._sessions) < 100_000:
            return
        now = self.clock()
        dead = [sid for sid, s in self._sessions.items()
                if now - s.created_at >= self.session_ttl]
        for sid in dead:
            del self._sessions[sid]

    def add_hashes(self, session_id: str, expdate: float | None,
                   ciphertext_hash: bytes, description: str,
                   captcha_required: bool = False) -> bytes:
        """Durably record one hash under the session's key; returns the key id.

        Past dates are accepted deliberately: they publish an image that is
        already expired. Repeated calls under one session share the key.
        """
        if len(ciphertext_hash) != 32:
            raise ValueError("hash must be 32 bytes")
        with self._lock:
            session = self._sessions.get(session_id)
            now = self.clock()
            if session is None or now - session.created_at >= self.session_ttl:
                self._sessions.pop(session_id, None)
                raise SessionExpiredError("session unknown or expired")
            key_id = secrets.token_bytes(16)
            rec = StoredRecord(
                key_id=key_id, key=session.key, expdate=expdate,
                ciphertext_hash=bytes(ciphertext_hash), description=description,
                created_at=now, captcha_required=captcha_required,
                owner=session.owner)
            self.store.put_record(rec)
            self._records[key_id] = rec
            return key_id

    # --- viewing phase ---

    def new_challenge(self) -> Challenge:
        prompt, solution = self.captcha_provider.new_challenge()
        ch = Challenge(secrets.token_hex(12), prompt, solution, self.clock())
        with self._lock:
            if len(self._challenges) > 50_000:
                now = self.clock()
                self._challenges = {
                    cid: c for cid, c in self._challenges.items()
                    if now - c.created_at < self.captcha_ttl and not c.used}
            self._challenges[ch.challenge_id] = ch
        return ch

    def verify_captcha(self, challenge_id: str, solution: str) -> bool:
        """Single-use verification; any outcome invalidates the challenge."""
        with self._lock:
            ch = self._challenges.pop(challenge_id, None)
            if ch is None or ch.used:
                return False
            if self.clock() - ch.created_at >= self.captcha_ttl:
                return False
            ch.used = True
            return hmac.compare_digest(ch.solution.strip(), solution.strip())

    def get_key(self, key_id: bytes, ciphertext_hash: bytes, *,
                source: str = "local",
                captcha_challenge_id: str | None = None,
                captcha_solution: str | None = None) -> bytes:
        """Release a key: expiry first, hash proof second, captcha gate last."""
        with self._lock:
            rec = self._records.get(bytes(key_id))
            if rec is None:
                raise RecordNotFoundError("no such key")
            now = self.clock()
            if rec.expdate is not None and now >= rec.expdate:
                raise RecordExpiredError("key has expired")
            if not hmac.compare_digest(rec.ciphertext_hash, bytes(ciphertext_hash)):
                raise HashMismatchError("hash does not match this key")
            if rec.captcha_required and not self._captcha_passed_locked(
                    source, rec, captcha_challenge_id, captcha_solution):
                ch = self.new_challenge()
                raise CaptchaRequiredError(ch.challenge_id, ch.prompt)
            return rec.key

    def _captcha_passed_locked(self, source: str, rec: StoredRecord,
                               challenge_id: str | None, solution: str | None) -> bool:
        cache_key = (source, rec.owner, rec.description)
        now = self.clock()
        hit = self._solved.get(cache_key)
        if hit is not None and now - hit < self.captcha_cache_ttl:
            return True
        if challenge_id is None or solution is None:
            return False
        if not self.verify_captcha(challenge_id, solution):
            return False
        self._solved[cache_key] = now
        return True

    # --- update phase ---

    def update_expiration(self, owner: str, key_id: bytes,
                          new_expdate: float | None) -> None:
        """Replace the expiration date; now-or-earlier expires instantly."""
        with self._lock:
            rec = self._records.get(bytes(key_id))
            if rec is None:
                raise RecordNotFoundError("no such key")
            if rec.owner != owner:
                raise NotOwnerError("key belongs to another account")
            self.store.update_expdate(rec.key_id, new_expdate)
            rec.expdate = new_expdate

    def list_keys(self, owner: str) -> list[dict]:
        """Owner's records; key bytes are never included."""
        with self._lock:
            return [{
                "key_id": rec.key_id.hex(),
                "description": rec.description,
                "created_at": rec.created_at,
                "expdate": rec.expdate,
                "captcha_required": rec.captcha_required,
            } for rec in self._records.values() if rec.owner == owner]

    # --- abuse controls ---

    def rate_limit_check(self, source: str, endpoint: str) -> None:
        """Token buckets per source address and per aggregated range."""
        limiter = self._limiters.get(endpoint)
        if limiter is None:
            return
        if not limiter.allow(source):
            raise RateLimitedError(f"rate limit exceeded for {endpoint}")
        if endpoint == "getkey":
            if not self._limiters["getkey-range"].allow(_range_of(source)):
                raise RateLimitedError("range rate limit exceeded for getkey")

    def live_session_count(self) -> int:
        now = self.clock()
        with self._lock:
            return sum(1 for s in self._sessions.values()
                       if now - s.created_at < self.session_ttl)
