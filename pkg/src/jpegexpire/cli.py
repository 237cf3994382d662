"""Command-line publisher, viewer, and key manager.

Exit codes: 0 ok, 2 key expired, 3 input not protected, 4 payload does not
fit the cover, 5 network or authentication failure.
"""
from __future__ import annotations

import argparse
import getpass
import os
import sys
from pathlib import Path

from . import errors
from .keyserver.client import KeyserverClient
from .profiles import BUILTIN_PROFILES, get_profile, load_profiles
from .publish import DEFAULT_BANNER, PublishJob, publish, view_bytes
from .stego import EmbedMode

EXIT_OK = 0
EXIT_EXPIRED = 2
EXIT_NOT_PROTECTED = 3
EXIT_CAPACITY = 4
EXIT_NETWORK_AUTH = 5


def _credentials(args) -> tuple[str, str]:
    user = args.user or os.environ.get("JPEGEXPIRE_USER")
    password = args.password or os.environ.get("JPEGEXPIRE_PASSWORD")
    if user is None:
        user = input("keyserver account: ")
    if password is None:
        password = getpass.getpass("password: ")
    return user, password


def _profiles(args) -> dict:
    extra = {}
    if getattr(args, "profiles_file", None):
        extra = load_profiles(args.profiles_file)
    return extra


def cmd_publish(args) -> int:
    user, password = _credentials(args)
    profile = get_profile(args.profile, _profiles(args))
    client = KeyserverClient(args.keyserver)
    job = PublishJob(
        inputs=[Path(p) for p in args.files],
        description=args.description,
        keyserver_url=args.keyserver,
        profile=profile,
        expdate=_parse_expiry_arg(args.expires),
        mode=EmbedMode(args.mode),
        captcha_required=args.captcha,
        output_dir=Path(args.out),
        banner_text=args.banner,
    )
    result = publish(job, client, user, password)
    for img in result.images:
        print(f"{img.source} -> {img.output}  key_id={img.key_id.hex()}")
    return EXIT_OK


def _parse_expiry_arg(value: str | None):
    from .dates import parse_expiry
    if value is None:
        return None
    if value.strip().lower() == "now":
        import time
        return time.time()
    return parse_expiry(value)


def _read_input(source: str) -> bytes:
    if source.startswith(("http://", "https://")):
        import requests
        resp = requests.get(source, timeout=30)
        resp.raise_for_status()
        return resp.content
    return Path(source).read_bytes()


def cmd_view(args) -> int:
    data = _read_input(args.input)

    def solver(prompt: str) -> str:
        if args.captcha_answer is not None:
            return args.captcha_answer
        return input(f"{prompt} ")

    def factory(url: str):
        return KeyserverClient(args.keyserver or url)

    result = view_bytes(data, factory, captcha_solver=solver)
    out = Path(args.output) if args.output else Path(args.input).with_suffix(".decrypted.jpg")
    out.write_bytes(result.plaintext)
    print(f"decrypted ({result.mode.value} route) -> {out}")
    return EXIT_OK


def cmd_update(args) -> int:
    user, password = _credentials(args)
    client = KeyserverClient(args.keyserver)
    key_id = _resolve_key(client, user, password, args.key)
    client.update_expiration(user, password, key_id, _parse_expiry_arg(args.expires))
    print(f"updated {key_id.hex()}")
    return EXIT_OK


def _resolve_key(client, user, password, selector: str) -> bytes:
    try:
        raw = bytes.fromhex(selector)
        if len(raw) == 16:
            return raw
    except ValueError:
        pass
    rows = [r for r in client.list_keys(user, password)
            if r["description"] == selector]
    if not rows:
        raise errors.RecordNotFoundError(f"no key matches selector {selector!r}")
    if len(rows) > 1:
        listing = "\n".join(f"  {r['key_id']}  created={r['created_at']} "
                            f"expires={r['expdate']}" for r in rows)
        raise errors.RecordNotFoundError(
            f"selector {selector!r} is ambiguous:\n{listing}")
    return bytes.fromhex(rows[0]["key_id"])


def cmd_keys(args) -> int:
    user, password = _credentials(args)
    client = KeyserverClient(args.keyserver)
    rows = client.list_keys(user, password)
    if not rows:
        print("no keys")
        return EXIT_OK
    from .dates import format_expiry as fmt

    for r in rows:
        print(f"{r['key_id']}  {r['description']!r}  created={fmt(r['created_at'])}  "
              f"expires={fmt(r['expdate'])}  captcha={r['captcha_required']}")
    return EXIT_OK


def cmd_register(args) -> int:
    user, password = _credentials(args)
    KeyserverClient(args.keyserver).register(user, password)
    print(f"registered {user!r}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .keyserver.app import serve
    from .keyserver.config import load_config
    cfg = load_config(args.config)
    if args.bind:
        host, _, port = args.bind.partition(":")
        cfg.bind_host = host or cfg.bind_host
        if port:
            cfg.bind_port = int(port)
    print(f"keyserver listening on {cfg.bind_host}:{cfg.bind_port} "
          f"(store: {cfg.store_path})")
    serve(cfg)
    return EXIT_OK


def cmd_bench(args) -> int:
    from . import bench
    if args.suite == "creation":
        rep = bench.bench_creation(counts=range(1, args.max_images + 1),
                                   reps=args.reps, progress=args.verbose)
        print(f"{'images':>6}  {'header ms':>10}  {'bits ms':>10}")
        for n, hdr, bits in rep.rows():
            print(f"{n:>6}  {hdr * 1000:>10.2f}  {bits * 1000:>10.2f}")
        for mode, fit in rep.fits.items():
            print(f"{mode}: {fit.slope * 1000:.2f} ms/image + {fit.intercept * 1000:.2f} ms, "
                  f"R^2={fit.r_squared:.4f}")
    elif args.suite == "extraction":
        rep = bench.bench_extraction(reps=args.reps)
        for mode, sec in rep.mode_seconds.items():
            print(f"{mode}: {sec * 1000:.2f} ms per image")
    else:
        rep = bench.bench_server(concurrency=args.concurrency,
                                 duration=args.duration, sessions=args.sessions)
        print(f"sessions created: {rep.sessions_created} (live: {rep.live_sessions})")
        print(f"sustained getkey: {rep.sustained_rps:.0f} requests/s over "
              f"{rep.duration:.1f} s ({rep.requests_ok} ok, "
              f"{rep.requests_limited} rate-limited)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jpegexpire",
        description="Give JPEG images an enforceable expiration date.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_server_args(p, creds=True):
        p.add_argument("--keyserver", default=os.environ.get(
            "JPEGEXPIRE_KEYSERVER", "http://127.0.0.1:8750"),
            help="keyserver base URL")
        if creds:
            p.add_argument("--user", help="account name (or JPEGEXPIRE_USER)")
            p.add_argument("--password", help="account password (or JPEGEXPIRE_PASSWORD)")

    p = sub.add_parser("publish", help="encrypt images and embed them in covers")
    p.add_argument("files", nargs="+", help="input images")
    p.add_argument("--expires", help="RFC 3339 expiration date, 'now', or omit for none")
    p.add_argument("--description", required=True, help="album identifier")
    p.add_argument("--mode", choices=[m.value for m in EmbedMode], default="bits")
    p.add_argument("--profile", default="facebook",
                   choices=None, help="site profile name "
                   f"(built-in: {', '.join(sorted(BUILTIN_PROFILES))})")
    p.add_argument("--profiles-file", help="JSON file with extra site profiles")
    p.add_argument("--captcha", action="store_true",
                   help="require a challenge before every view")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--banner", default=DEFAULT_BANNER, help="cover banner text")
    add_server_args(p)
    p.set_defaults(func=cmd_publish)

    p = sub.add_parser("view", help="decrypt a protected image")
    p.add_argument("input", help="file path or http(s) URL")
    p.add_argument("-o", "--output", help="output path for the decrypted image")
    p.add_argument("--keyserver", default=None,
                   help="override the keyserver URL from the image")
    p.add_argument("--captcha-answer", help="scripted answer for a challenge")
    p.set_defaults(func=cmd_view)

    p = sub.add_parser("update", help="change a key's expiration date")
    p.add_argument("--key", required=True, help="key id (hex) or description selector")
    p.add_argument("--expires", required=True,
                   help="RFC 3339 date, 'now' for instant expiry, or 'never'")
    add_server_args(p)
    p.set_defaults(func=cmd_update)

    p = sub.add_parser("keys", help="key management")
    keys_sub = p.add_subparsers(dest="keys_command", required=True)
    pl = keys_sub.add_parser("list", help="list your keys")
    add_server_args(pl)
    pl.set_defaults(func=cmd_keys)

    p = sub.add_parser("register", help="create a keyserver account")
    add_server_args(p)
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("serve", help="run the keyserver")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--bind", help="host:port override")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("bench", help="performance measurements")
    p.add_argument("suite", choices=["creation", "extraction", "server"])
    p.add_argument("--max-images", type=int, default=50)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--concurrency", type=int, default=16)
    p.add_argument("--duration", type=float, default=5.0)
    p.add_argument("--sessions", type=int, default=10_000)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except errors.RecordExpiredError as exc:
        print(f"expired: {exc}", file=sys.stderr)
        return EXIT_EXPIRED
    except (errors.NotProtectedError, errors.NotEnvelopeError) as exc:
        print(f"not protected: {exc}", file=sys.stderr)
        return EXIT_NOT_PROTECTED
    except errors.CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except errors.CaptchaRequiredError as exc:
        print(f"captcha required but no answer given: {exc.prompt}", file=sys.stderr)
        return EXIT_NETWORK_AUTH
    except (errors.AuthError, errors.NotOwnerError, errors.SessionExpiredError,
            errors.RateLimitedError, errors.KeyserverError) as exc:
        print(f"keyserver: {exc}", file=sys.stderr)
        return EXIT_NETWORK_AUTH
    except errors.JpegExpireError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
