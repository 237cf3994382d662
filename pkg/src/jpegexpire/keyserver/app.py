"""HTTP front end: JSON bodies, hex-encoded binary fields.

Endpoints (all under /v1): createkey, addhashes, getkey, update, keys,
captcha/verify, plus register and login for account management. Error
responses carry {"error": {"code": ..., "message": ...}} with the code
matching the service-level enumeration; a CAPTCHA_REQUIRED error includes
the fresh challenge. TLS is expected to be terminated in front of the
server.
"""
from __future__ import annotations

import base64
import binascii
from typing import Optional

from fastapi import FastAPI, Header, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..dates import parse_expiry
from ..errors import (AuthError, BadRequestError, CaptchaRequiredError,
                      KeyserverError)
from .config import ServerConfig
from .service import KeyService
from .store import KeyStore

_HTTP_STATUS = {
    "AUTH_ERROR": 401,
    "SESSION_EXPIRED": 401,
    "NOT_OWNER": 403,
    "HASH_MISMATCH": 403,
    "NOT_FOUND": 404,
    "EXPIRED": 410,
    "INVALID_DATE": 400,
    "BAD_REQUEST": 400,
    "CAPTCHA_REQUIRED": 428,
    "RATE_LIMITED": 429,
    "KEYSERVER_ERROR": 500,
}


def _hex(value: str, name: str, length: int | None = None) -> bytes:
    try:
        raw = binascii.unhexlify(value)
    except (binascii.Error, TypeError) as exc:
        raise BadRequestError(f"{name} is not valid hex") from exc
    if length is not None and len(raw) != length:
        raise BadRequestError(f"{name} must be {length} bytes")
    return raw


class Credentials(BaseModel):
    username: str
    password: str


class AddHashesBody(BaseModel):
    session_id: str
    expdate: Optional[str | float] = None
    hash: str
    description: str = ""
    captcha_required: bool = False


class GetKeyBody(BaseModel):
    key_id: str
    hash: str
    captcha_challenge_id: Optional[str] = None
    captcha_solution: Optional[str] = None


class UpdateBody(BaseModel):
    key_id: str
    expires: Optional[str | float] = None
    username: Optional[str] = None
    password: Optional[str] = None


class CaptchaBody(BaseModel):
    challenge_id: str
    solution: str


def create_app(service: KeyService, allow_registration: bool = True) -> FastAPI:
    app = FastAPI(title="jpegexpire keyserver", docs_url=None, redoc_url=None)
    app.state.service = service

    @app.exception_handler(KeyserverError)
    async def _keyserver_error(request: Request, exc: KeyserverError):
        body = {"error": {"code": exc.code, "message": str(exc)}}
        if isinstance(exc, CaptchaRequiredError):
            body["error"]["challenge_id"] = exc.challenge_id
            body["error"]["prompt"] = exc.prompt
        return JSONResponse(body, status_code=_HTTP_STATUS.get(exc.code, 500))

    def _source(request: Request) -> str:
        client = request.client
        return client.host if client else "unknown"

    def _owner_from_auth(authorization: str | None,
                         username: str | None = None,
                         password: str | None = None) -> str:
        if authorization:
            scheme, _, param = authorization.partition(" ")
            scheme = scheme.lower()
            if scheme == "bearer":
                return service.resolve_owner(token=param.strip())
            if scheme == "basic":
                try:
                    user, _, pw = base64.b64decode(param).decode("utf-8").partition(":")
                except Exception as exc:
                    raise AuthError("malformed basic credentials") from exc
                return service.resolve_owner(username=user, password=pw)
            raise AuthError(f"unsupported authorization scheme {scheme!r}")
        return service.resolve_owner(username=username, password=password)

    @app.post("/v1/register")
    def register(body: Credentials):
        if not allow_registration:
            raise AuthError("registration is disabled on this server")
        service.register(body.username, body.password)
        return {"ok": True}

    @app.post("/v1/login")
    def login(body: Credentials):
        return {"token": service.login(body.username, body.password)}

    @app.post("/v1/createkey")
    def createkey(body: Credentials, request: Request):
        service.rate_limit_check(_source(request), "createkey")
        key, session_id = service.create_key(body.username, body.password)
        return {"key": key.hex(), "session_id": session_id}

    @app.post("/v1/addhashes")
    def addhashes(body: AddHashesBody):
        key_id = service.add_hashes(
            body.session_id, parse_expiry(body.expdate),
            _hex(body.hash, "hash", 32), body.description, body.captcha_required)
        return {"key_id": key_id.hex()}

    @app.post("/v1/getkey")
    def getkey(body: GetKeyBody, request: Request):
        source = _source(request)
        service.rate_limit_check(source, "getkey")
        key = service.get_key(
            _hex(body.key_id, "key_id", 16), _hex(body.hash, "hash", 32),
            source=source,
            captcha_challenge_id=body.captcha_challenge_id,
            captcha_solution=body.captcha_solution)
        return {"key": key.hex()}

    @app.post("/v1/update")
    def update(body: UpdateBody, authorization: Optional[str] = Header(default=None)):
        owner = _owner_from_auth(authorization, body.username, body.password)
        service.update_expiration(owner, _hex(body.key_id, "key_id", 16),
                                  parse_expiry(body.expires))
        return {"ok": True}

    @app.get("/v1/keys")
    def keys(authorization: Optional[str] = Header(default=None)):
        owner = _owner_from_auth(authorization)
        return {"keys": service.list_keys(owner)}

    @app.post("/v1/captcha/verify")
    def captcha_verify(body: CaptchaBody):
        return {"pass": service.verify_captcha(body.challenge_id, body.solution)}

    @app.get("/healthz")
    def healthz():
        return {"ok": True, "live_sessions": service.live_session_count()}

    return app


def build_service(cfg: ServerConfig, clock=None) -> KeyService:
    import time as _time
    store = KeyStore(cfg.store_path, cfg.master_key)
    return KeyService(
        store, clock or _time.time,
        session_ttl=cfg.session_ttl,
        token_ttl=cfg.token_ttl,
        captcha_ttl=cfg.captcha_ttl,
        captcha_cache_ttl=cfg.captcha_cache_ttl,
        pbkdf2_iterations=cfg.pbkdf2_iterations,
        getkey_rate_per_min=cfg.getkey_rate_per_min,
        getkey_range_rate_per_min=cfg.getkey_range_rate_per_min,
        createkey_rate_per_min=cfg.createkey_rate_per_min,
    )


def serve(cfg: ServerConfig) -> None:
    """Run the keyserver in the foreground."""
    import uvicorn
    app = create_app(build_service(cfg), allow_registration=cfg.allow_registration)
    uvicorn.run(app, host=cfg.bind_host, port=cfg.bind_port, log_level="warning")


class ServerThread:
    """Background uvicorn instance for benchmarks and tests."""

    def __init__(self, service: KeyService, host: str = "127.0.0.1", port: int = 0,
                 allow_registration: bool = True):
        import socket
        import threading
        import uvicorn

        if port == 0:
            with socket.socket() as s:
                s.bind((host, 0))
                port = s.getsockname()[1]
        self.host, self.port = host, port
        self.base_url = f"http://{host}:{port}"
        app = create_app(service, allow_registration=allow_registration)
        config = uvicorn.Config(app, host=host, port=port, log_level="error")
        self._server = uvicorn.Server(config)
        self._thread = threading.Thread(target=self._server.run, daemon=True)

    def __enter__(self) -> "ServerThread":
        import time as _time
        self._thread.start()
        deadline = _time.monotonic() + 10
        while not self._server.started:
            if _time.monotonic() > deadline:
                raise RuntimeError("keyserver failed to start")
            _time.sleep(0.01)
        return self

    def __exit__(self, *exc) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10)
