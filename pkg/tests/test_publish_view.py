from __future__ import annotations

import numpy as np
import pytest
from PIL import Image

from jpegexpire import codec, jfif
from jpegexpire.errors import (CapacityError, CaptchaRequiredError,
                               HashMismatchError, NotProtectedError,
                               RecordExpiredError)
from jpegexpire.profiles import BUILTIN_PROFILES, SiteProfile
from jpegexpire.publish import (PublishJob, extract_payload, publish,
                                view_bytes)
from jpegexpire.recompress import recompress
from jpegexpire.stego import EmbedMode

from conftest import synthetic_photo

FB = BUILTIN_PROFILES["facebook"]
CREDS = ("alice", "correct horse")


@pytest.fixture()
def source_photo(tmp_path):
    path = tmp_path / "source.png"
    Image.fromarray(synthetic_photo(900, 700, seed=11)).save(path)
    return path


def _job(tmp_path, source, mode=EmbedMode.BITS, **kw):
    defaults = dict(inputs=[source], description="trip",
                    keyserver_url="http://keys.test", profile=FB,
                    mode=mode, output_dir=tmp_path / "out")
    defaults.update(kw)
    return PublishJob(**defaults)


def test_view_of_published_file_is_bit_exact(tmp_path, source_photo, local_client):
    res = publish(_job(tmp_path, source_photo), local_client, *CREDS)
    blob = res.images[0].output.read_bytes()
    view = view_bytes(blob, lambda url: local_client)
    # same ciphertext implies the exact prepared plaintext bytes
    from jpegexpire.envelope import sha256
    from jpegexpire.profiles import BUILTIN_PROFILES
    from jpegexpire.publish import load_raster, prepare_source
    expected = prepare_source(load_raster(source_photo), FB)
    assert view.plaintext == expected
    assert view.mode is EmbedMode.BITS
    # the plaintext itself decodes to a 700x700-or-less image
    img = jfif.parse_jfif(view.plaintext)
    assert img.width <= 720 and img.height <= 720


def test_view_survives_recompression(tmp_path, source_photo, local_client):
    res = publish(_job(tmp_path, source_photo), local_client, *CREDS)
    blob = recompress(res.images[0].output.read_bytes(), FB)
    view = view_bytes(blob, lambda url: local_client)
    assert jfif.parse_jfif(view.plaintext).width <= 720


def test_header_mode_pixels_identical_and_roundtrip(tmp_path, source_photo, local_client):
    res = publish(_job(tmp_path, source_photo, mode=EmbedMode.HEADER),
                  local_client, *CREDS)
    blob = res.images[0].output.read_bytes()
    view = view_bytes(blob, lambda url: local_client)
    assert view.mode is EmbedMode.HEADER
    # output pixels equal the cover's: strip the comments and compare scans
    img = jfif.parse_jfif(blob)
    stripped = jfif.JfifImage(
        width=img.width, height=img.height, components=img.components,
        quant_tables=img.quant_tables, huffman_tables=img.huffman_tables,
        scan_data=img.scan_data)
    cover_like = codec.decode(stripped)
    assert (codec.decode(img) == cover_like).all()


def test_header_mode_destroyed_by_recompression(tmp_path, source_photo, local_client):
    res = publish(_job(tmp_path, source_photo, mode=EmbedMode.HEADER),
                  local_client, *CREDS)
    blob = recompress(res.images[0].output.read_bytes(), FB)
    with pytest.raises(NotProtectedError):
        extract_payload(blob)


def test_album_shares_one_key(tmp_path, local_client):
    paths = []
    for i in range(3):
        p = tmp_path / f"img{i}.png"
        Image.fromarray(synthetic_photo(200, 160, seed=i)).save(p)
        paths.append(p)
    res = publish(_job(tmp_path, paths[0], inputs=paths, description="album"),
                  local_client, *CREDS)
    assert len(res.images) == 3
    assert len({img.key_id for img in res.images}) == 3
    # one get_key unlocks every image: all envelopes decrypt with the same key
    keys = set()
    for img in res.images:
        view = view_bytes(img.output.read_bytes(), lambda url: local_client)
        from jpegexpire.envelope import sha256
        keys.add(local_client.get_key(view.envelope.key_id,
                                      sha256(view.envelope.ciphertext)))
    assert len(keys) == 1


def test_view_after_instant_expiry_raises(tmp_path, source_photo, local_client,
                                          service, fake_clock):
    res = publish(_job(tmp_path, source_photo), local_client, *CREDS)
    blob = res.images[0].output.read_bytes()
    local_client.update_expiration(*CREDS, res.images[0].key_id, fake_clock.now)
    with pytest.raises(RecordExpiredError):
        view_bytes(blob, lambda url: local_client)


def test_view_unprotected_photo_raises(tmp_path, local_client):
    img = synthetic_photo(300, 260, seed=20)
    blob = jfif.serialize_jfif(codec.encode(img, FB.luma_quant, FB.chroma_quant))
    with pytest.raises(NotProtectedError):
        view_bytes(blob, lambda url: local_client)


def test_tampered_payload_hash_mismatch(tmp_path, source_photo, local_client):
    res = publish(_job(tmp_path, source_photo, mode=EmbedMode.HEADER),
                  local_client, *CREDS)
    img = jfif.parse_jfif(res.images[0].output.read_bytes())
    # flip one ciphertext byte inside the envelope, re-frame everything
    from jpegexpire import rs, stego
    from jpegexpire.envelope import PayloadEnvelope, build_envelope, parse_envelope
    coded = stego.extract_header(img)
    env = parse_envelope(rs.rs_decode_stream(coded))
    ct = bytearray(env.ciphertext)
    ct[20] ^= 0x01
    recoded = rs.rs_encode_stream(build_envelope(PayloadEnvelope(
        env.keyserver_url, env.key_id, env.iv, bytes(ct))))
    img.comments = [c for c in img.comments if not c.startswith(stego.HEADER_MAGIC)]
    blob = jfif.serialize_jfif(stego.embed_header(img, recoded))
    with pytest.raises(HashMismatchError):
        view_bytes(blob, lambda url: local_client)


def test_captcha_prompting_during_view(tmp_path, source_photo, local_client, service):
    res = publish(_job(tmp_path, source_photo, mode=EmbedMode.HEADER,
                       captcha_required=True),
                  local_client, *CREDS)
    blob = res.images[0].output.read_bytes()
    with pytest.raises(CaptchaRequiredError):
        view_bytes(blob, lambda url: local_client)

    def solver(prompt: str) -> str:
        nums = [int(t) for t in prompt.replace("?", "").split() if t.isdigit()]
        return str(sum(nums))

    view = view_bytes(blob, lambda url: local_client, captcha_solver=solver)
    assert view.plaintext.startswith(b"\xff\xd8")


def test_capacity_error_for_tiny_profile(tmp_path, source_photo, local_client):
    tiny = SiteProfile("tiny", 160, 160, FB.luma_quant, FB.chroma_quant)
    # a 160x160 cover cannot hold a photo's ciphertext
    with pytest.raises(CapacityError):
        publish(_job(tmp_path, source_photo, profile=tiny), local_client, *CREDS)


def test_big_photo_appendix_scenario(tmp_path, local_client):
    # large high-resolution input: after scaling to the profile maximum and
    # re-encoding it still fits the cover
    path = tmp_path / "big.png"
    Image.fromarray(synthetic_photo(3500, 2700, seed=30)).save(path)
    res = publish(_job(tmp_path, path), local_client, *CREDS)
    out = jfif.parse_jfif(res.images[0].output.read_bytes())
    assert (out.width, out.height) == (720, 720)
    view = view_bytes(res.images[0].output.read_bytes(), lambda url: local_client)
    inner = jfif.parse_jfif(view.plaintext)
    assert inner.width == 720 and inner.height <= 720
