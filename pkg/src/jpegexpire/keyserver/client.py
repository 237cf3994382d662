"""Keyserver clients: one speaking HTTP, one wrapping a service in-process.

Both expose the same call surface, raising the exceptions from errors.py on
failure, so the publishing and viewing flows are transport-agnostic (tests
and benchmarks run against the in-process client; the CLI uses HTTP).
"""
from __future__ import annotations

import requests

from .. import errors
from .service import KeyService

_ERROR_BY_CODE = {
    "AUTH_ERROR": errors.AuthError,
    "NOT_OWNER": errors.NotOwnerError,
    "SESSION_EXPIRED": errors.SessionExpiredError,
    "INVALID_DATE": errors.InvalidDateError,
    "BAD_REQUEST": errors.BadRequestError,
    "NOT_FOUND": errors.RecordNotFoundError,
    "EXPIRED": errors.RecordExpiredError,
    "HASH_MISMATCH": errors.HashMismatchError,
    "RATE_LIMITED": errors.RateLimitedError,
}


class KeyserverClient:
    """Thin wrapper over the HTTP endpoints."""

    def __init__(self, base_url: str, timeout: float = 10.0,
                 session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._http = session or requests.Session()

    def _call(self, method: str, path: str, json_body: dict | None = None,
              headers: dict | None = None) -> dict:
        try:
            resp = self._http.request(method, self.base_url + path, json=json_body,
                                      headers=headers, timeout=self.timeout)
        except requests.RequestException as exc:
            raise errors.KeyserverError(f"keyserver unreachable: {exc}") from exc
        if resp.status_code < 400:
            return resp.json()
        try:
            err = resp.json()["error"]
        except Exception:
            raise errors.KeyserverError(
                f"keyserver returned HTTP {resp.status_code}") from None
        code = err.get("code", "KEYSERVER_ERROR")
        if code == "CAPTCHA_REQUIRED":
            raise errors.CaptchaRequiredError(err.get("challenge_id", ""),
                                              err.get("prompt", ""))
        raise _ERROR_BY_CODE.get(code, errors.KeyserverError)(
            err.get("message", code))

    def register(self, username: str, password: str) -> None:
        self._call("POST", "/v1/register",
                   {"username": username, "password": password})

    def create_key(self, username: str, password: str) -> tuple[bytes, str]:
        out = self._call("POST", "/v1/createkey",
                         {"username": username, "password": password})
        return bytes.fromhex(out["key"]), out["session_id"]

    def add_hashes(self, session_id: str, expdate: float | None,
                   ciphertext_hash: bytes, description: str,
                   captcha_required: bool = False) -> bytes:
        out = self._call("POST", "/v1/addhashes", {
            "session_id": session_id,
            "expdate": expdate,
            "hash": ciphertext_hash.hex(),
            "description": description,
            "captcha_required": captcha_required})
        return bytes.fromhex(out["key_id"])

    def get_key(self, key_id: bytes, ciphertext_hash: bytes,
                captcha: tuple[str, str] | None = None) -> bytes:
        body = {"key_id": key_id.hex(), "hash": ciphertext_hash.hex()}
        if captcha is not None:
            body["captcha_challenge_id"], body["captcha_solution"] = captcha
        return bytes.fromhex(self._call("POST", "/v1/getkey", body)["key"])

    def update_expiration(self, username: str, password: str,
                          key_id: bytes, new_expdate: float | None) -> None:
        self._call("POST", "/v1/update", {
            "key_id": key_id.hex(), "expires": new_expdate,
            "username": username, "password": password})

    def list_keys(self, username: str, password: str) -> list[dict]:
        token = self._call("POST", "/v1/login",
                           {"username": username, "password": password})["token"]
        out = self._call("GET", "/v1/keys",
                         headers={"Authorization": f"Bearer {token}"})
        return out["keys"]


class LocalKeyserverClient:
    """Same surface as KeyserverClient, no sockets; wraps a KeyService."""

    def __init__(self, service: KeyService, source: str = "10.0.0.1"):
        self.service = service
        self.source = source

    def register(self, username: str, password: str) -> None:
        self.service.register(username, password)

    def create_key(self, username: str, password: str) -> tuple[bytes, str]:
        self.service.rate_limit_check(self.source, "createkey")
        return self.service.create_key(username, password)

    def add_hashes(self, session_id: str, expdate: float | None,
                   ciphertext_hash: bytes, description: str,
                   captcha_required: bool = False) -> bytes:
        return self.service.add_hashes(session_id, expdate, ciphertext_hash,
                                       description, captcha_required)

    def get_key(self, key_id: bytes, ciphertext_hash: bytes,
                captcha: tuple[str, str] | None = None) -> bytes:
        self.service.rate_limit_check(self.source, "getkey")
        challenge_id, solution = captcha if captcha else (None, None)
        return self.service.get_key(key_id, ciphertext_hash, source=self.source,
                                    captcha_challenge_id=challenge_id,
                                    captcha_solution=solution)

    def update_expiration(self, username: str, password: str,
                          key_id: bytes, new_expdate: float | None) -> None:
        owner = self.service.resolve_owner(username=username, password=password)
        self.service.update_expiration(owner, key_id, new_expdate)

    def list_keys(self, username: str, password: str) -> list[dict]:
        owner = self.service.resolve_owner(username=username, password=password)
        return self.service.list_keys(owner)
