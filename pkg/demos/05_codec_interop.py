"""The built-in codec against an independent libjpeg-backed decoder.

Encodes with our pipeline, decodes with Pillow, and vice versa; per-pixel
differences stay within one code value in both directions, which is what
lets embedded covers round-trip through foreign software unharmed.
"""
import io

import numpy as np
from PIL import Image

from jpegexpire import codec, jfif
from jpegexpire.profiles import BUILTIN_PROFILES

fb = BUILTIN_PROFILES["facebook"]
rng = np.random.default_rng(3)

yy, xx = np.mgrid[0:300, 0:420]
photo = np.stack([xx % 256, (xx + yy) % 256, yy % 256], axis=-1).astype(np.uint8)
photo = (photo * 0.7 + rng.normal(0, 10, photo.shape)).clip(0, 255).astype(np.uint8)

print("direction 1: our encoder -> independent decoder")
ours = jfif.serialize_jfif(
    codec.encode(photo, fb.luma_quant, fb.chroma_quant, subsampling="420"))
pil = Image.open(io.BytesIO(ours))
print(f"  independent decoder accepts the file: {pil.size} {pil.mode}")
theirs = np.asarray(pil.convert("RGB")).astype(int)
mine = codec.decode(jfif.parse_jfif(ours)).astype(int)
print(f"  max per-pixel difference between the two decoders: "
      f"{np.abs(mine - theirs).max()}")

print("\ndirection 2: independent encoder -> our decoder")
for quality, sub, name in ((90, 0, "4:4:4"), (75, 2, "4:2:0"), (60, 1, "4:2:2")):
    buf = io.BytesIO()
    Image.fromarray(photo).save(buf, "JPEG", quality=quality, subsampling=sub)
    data = buf.getvalue()
    mine = codec.decode(jfif.parse_jfif(data)).astype(int)
    theirs = np.asarray(Image.open(io.BytesIO(data)).convert("RGB")).astype(int)
    print(f"  quality {quality}, {name}: max difference "
          f"{np.abs(mine - theirs).max()}, file {len(data) // 1024} KiB")

print("\nhook points (where embedding and extraction happen):")
seen = []
codec.encode(photo[:64, :64], fb.luma_quant, fb.chroma_quant,
             hooks=codec.CodecHooks(
                 pre_dct=lambda block, r, c: seen.append((r, c)) or None))
print(f"  pre-DCT hook visited {len(seen)} luminance blocks in raster order: "
      f"{seen[:4]}...")
