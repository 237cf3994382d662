"""High-level protect and view flows shared by the CLI, tests, and benches.

Publishing one job:
  1. create_key once (all images of a job share the key and description),
  2. per image: normalize the source (scale to the profile limits, re-encode
     with the profile tables), encrypt, hash, add_hashes -> key id,
  3. wrap everything a viewer needs into the envelope, ECC-code it, and
     embed it into a banner container, either as luminance symbols or as
     header comment segments.

Viewing reverses that: detect the route, extract, repair with ECC, fetch
the key with the ciphertext hash as download proof, decrypt.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from PIL import Image

from . import codec, envelope as env_mod, jfif, rs, stego
from .errors import CapacityError, CaptchaRequiredError, NotProtectedError
from .profiles import SiteProfile
from .stego import EmbedMode

DEFAULT_BANNER = "Expiring picture: install the viewer to see it"


@dataclass
class PublishJob:
    inputs: list[Path]
    description: str
    keyserver_url: str
    profile: SiteProfile
    expdate: float | None = None
    mode: EmbedMode = EmbedMode.BITS
    captcha_required: bool = False
    output_dir: Path = Path(".")
    banner_text: str = DEFAULT_BANNER


@dataclass
class PublishedImage:
    source: Path
    output: Path
    key_id: bytes
    ciphertext_hash: bytes


@dataclass
class PublishResult:
    images: list[PublishedImage] = field(default_factory=list)

    @property
    def key_ids(self) -> list[bytes]:
        return [img.key_id for img in self.images]


def load_raster(path: Path) -> np.ndarray:
    """Read any common image format into an RGB array."""
    data = Path(path).read_bytes()
    if data[:2] == b"\xff\xd8":
        return codec.decode(jfif.parse_jfif(data))
    return np.asarray(Image.open(path).convert("RGB"))


def prepare_source(raster: np.ndarray, profile: SiteProfile,
                   fit_profile_dims: bool = True) -> bytes:
    """Scale to the profile limits and re-encode; the result is the plaintext."""
    h, w = raster.shape[:2]
    if fit_profile_dims and (w > profile.max_width or h > profile.max_height):
        scale = min(profile.max_width / w, profile.max_height / h)
        pil = Image.fromarray(raster).resize(
            (max(8, int(round(w * scale))), max(8, int(round(h * scale)))),
            Image.BILINEAR)
        raster = np.asarray(pil)
    out = codec.encode(raster, profile.luma_quant, profile.chroma_quant,
                       subsampling=profile.chroma_subsampling)
    return jfif.serialize_jfif(out)


def _banner_rows_for(height: int) -> int:
    return stego.BANNER_ROWS if height >= 2 * stego.BANNER_ROWS else max(8, height // 4)


def embed_payload(coded: bytes, profile: SiteProfile, mode: EmbedMode,
                  banner_text: str = DEFAULT_BANNER,
                  source_dims: tuple[int, int] | None = None) -> jfif.JfifImage:
    """Put an ECC-coded payload into a fresh banner cover.

    Bit mode uses the profile's maximum geometry so the upload pipeline never
    rescales; header mode matches the source dimensions (static sites do not
    care) and leaves pixels untouched by the payload.
    """
    if mode is EmbedMode.BITS:
        cap = stego.compute_capacity(profile.max_width, profile.max_height)
        if len(coded) > cap.raw_bytes - rs.N:
            raise CapacityError(
                f"payload needs {len(coded)} coded bytes but the "
                f"{profile.name} cover carries {cap.raw_bytes - rs.N}")
        cover = stego.make_container(profile.max_width, profile.max_height, banner_text)
        stamped = stego.embed_bits(cover, coded)
        return codec.encode(stamped, profile.luma_quant, profile.chroma_quant,
                            subsampling=profile.chroma_subsampling)
    w, h = source_dims if source_dims else (profile.max_width, profile.max_height)
    cover = stego.make_container(w, h, banner_text,
                                 banner_rows=_banner_rows_for(h))
    base = codec.encode(cover, profile.luma_quant, profile.chroma_quant,
                        subsampling=profile.chroma_subsampling)
    return stego.embed_header(base, coded)


def protect_bytes(plaintext_jpeg: bytes, key: bytes, key_id: bytes,
                  keyserver_url: str, profile: SiteProfile,
                  mode: EmbedMode, banner_text: str = DEFAULT_BANNER,
                  iv: bytes | None = None) -> tuple[bytes, bytes]:
    """Encrypt and embed one prepared image; returns (output file, hash)."""
    iv, ciphertext = env_mod.encrypt(key, plaintext_jpeg, iv)
    digest = env_mod.sha256(ciphertext)
    payload = env_mod.build_envelope(env_mod.PayloadEnvelope(
        keyserver_url=keyserver_url, key_id=key_id, iv=iv, ciphertext=ciphertext))
    src = jfif.parse_jfif(plaintext_jpeg)
    out = embed_payload(rs.rs_encode_stream(payload), profile, mode,
                        banner_text, source_dims=(src.width, src.height))
    return jfif.serialize_jfif(out), digest


def publish(job: PublishJob, client, username: str, password: str) -> PublishResult:
    """Run the whole publishing phase for a job against a keyserver client."""
    key, session_id = client.create_key(username, password)
    result = PublishResult()
    job.output_dir.mkdir(parents=True, exist_ok=True)
    for path in job.inputs:
        plaintext = prepare_source(load_raster(path), job.profile,
                                   fit_profile_dims=job.mode is EmbedMode.BITS)
        iv, ciphertext = env_mod.encrypt(key, plaintext)
        digest = env_mod.sha256(ciphertext)
        key_id = client.add_hashes(session_id, job.expdate, digest,
                                   job.description, job.captcha_required)
        payload = env_mod.build_envelope(env_mod.PayloadEnvelope(
            keyserver_url=job.keyserver_url, key_id=key_id, iv=iv,
            ciphertext=ciphertext))
        src = jfif.parse_jfif(plaintext)
        out = embed_payload(rs.rs_encode_stream(payload), job.profile, job.mode,
                            job.banner_text, source_dims=(src.width, src.height))
        out_path = job.output_dir / f"{Path(path).stem}.protected.jpg"
        out_path.write_bytes(jfif.serialize_jfif(out))
        result.images.append(PublishedImage(Path(path), out_path, key_id, digest))
    return result


@dataclass
class ViewResult:
    plaintext: bytes
    mode: EmbedMode
    envelope: env_mod.PayloadEnvelope


def extract_payload(file_bytes: bytes) -> tuple[bytes, EmbedMode]:
    """Pull the ECC-coded payload out of a protected file, either route."""
    img = jfif.parse_jfif(file_bytes)
    try:
        return stego.extract_header(img), EmbedMode.HEADER
    except NotProtectedError:
        pass
    raster = codec.decode(img)
    return stego.extract_bits(raster), EmbedMode.BITS


def view_bytes(file_bytes: bytes, client_factory: Callable[[str], object],
               captcha_solver: Callable[[str], str] | None = None,
               max_captcha_attempts: int = 3) -> ViewResult:
    """Decrypt a protected file; raises the enumerated keyserver errors.

    client_factory maps the keyserver URL recovered from the envelope to a
    client object; tests substitute in-process clients this way.
    """
    coded, mode = extract_payload(file_bytes)
    payload = rs.rs_decode_stream(coded)
    env = env_mod.parse_envelope(payload)
    digest = env_mod.sha256(env.ciphertext)
    client = client_factory(env.keyserver_url)

    captcha: tuple[str, str] | None = None
    attempts = 0
    while True:
        try:
            key = client.get_key(env.key_id, digest, captcha=captcha)
            break
        except CaptchaRequiredError as challenge:
            attempts += 1
            if captcha_solver is None or attempts >= max_captcha_attempts:
                raise
            captcha = (challenge.challenge_id, captcha_solver(challenge.prompt))

    plaintext = env_mod.decrypt(key, env.iv, env.ciphertext)
    return ViewResult(plaintext=plaintext, mode=mode, envelope=env)
