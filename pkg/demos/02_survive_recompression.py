"""Watch the embedding survive a social-network recompression pass.

Embeds a random payload into a cover, pushes the published JPEG through the
simulated upload pipeline (metadata stripped, requantized with the site's
tables), and reports the raw symbol damage before Reed-Solomon repairs it.
"""
import numpy as np

from jpegexpire import codec, jfif, rs, stego
from jpegexpire.envelope import sha256
from jpegexpire.profiles import BUILTIN_PROFILES
from jpegexpire.recompress import recompress

fb = BUILTIN_PROFILES["facebook"]
rng = np.random.default_rng(42)

cap = stego.compute_capacity(720, 720)
print(f"cover 720x720, banner 70 rows:")
print(f"  usable luminance pixels : {cap.usable_pixels:>8}")
print(f"  raw embeddable bytes    : {cap.raw_bytes:>8}  (2 bits per pixel)")
print(f"  after ECC, exact rate   : {cap.payload_bytes_after_ecc:>8}  (191/255)")
print(f"  after ECC, 3/4 figure   : {cap.payload_bytes_paper_rate:>10.1f}")

payload = rng.integers(0, 256, 60_000, dtype=np.uint8).tobytes()
coded = rs.rs_encode_stream(payload)
print(f"\npayload {len(payload)} bytes -> {len(coded)} coded bytes "
      f"({len(coded) // 255} codewords)")

cover = stego.make_container(720, 720, "Expiring picture: install the viewer")
stamped = stego.embed_bits(cover, coded)
published = jfif.serialize_jfif(
    codec.encode(stamped, fb.luma_quant, fb.chroma_quant,
                 subsampling=fb.chroma_subsampling))
print(f"published cover: {len(published) // 1024} KiB on disk")

uploaded = recompress(published, fb)   # what the site serves back
raster = codec.decode(jfif.parse_jfif(uploaded))
got = stego.extract_bits(raster)

sent = np.frombuffer(coded, np.uint8).reshape(-1, 255)
back = np.frombuffer(got, np.uint8).reshape(-1, 255)
per_cw = (sent != back).sum(axis=1)
print(f"\nafter one recompression pass:")
print(f"  corrupted symbols per codeword: max {per_cw.max()}, "
      f"mean {per_cw.mean():.2f} of 255")
print(f"  (the code repairs up to 32 per codeword, 12.5%)")

repaired = rs.rs_decode_stream(got, length=len(payload))
print(f"  payload recovered bit-exact: {sha256(repaired) == sha256(payload)}")

# a second pass for good measure
twice = recompress(uploaded, fb)
got2 = stego.extract_bits(codec.decode(jfif.parse_jfif(twice)))
per_cw2 = (sent != np.frombuffer(got2, np.uint8).reshape(-1, 255)).sum(axis=1)
repaired2 = rs.rs_decode_stream(got2, length=len(payload))
print(f"\nafter a second pass: max {per_cw2.max()} corrupted symbols, "
      f"still recovered: {sha256(repaired2) == sha256(payload)}")
