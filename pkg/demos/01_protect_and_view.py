"""Protect a picture end to end, then view it back.

Runs everything in one process: an in-memory keyserver, a publish job, and
the viewing flow. No network, no files outside a temp directory.
"""
import tempfile
import time
from pathlib import Path

import numpy as np
from PIL import Image

from jpegexpire import jfif
from jpegexpire.keyserver import KeyService, KeyStore
from jpegexpire.keyserver.client import LocalKeyserverClient
from jpegexpire.profiles import BUILTIN_PROFILES
from jpegexpire.publish import PublishJob, publish, view_bytes
from jpegexpire.stego import EmbedMode

workdir = Path(tempfile.mkdtemp(prefix="jpegexpire-demo-"))

# ---- a picture worth protecting -------------------------------------------
yy, xx = np.mgrid[0:600, 0:800]
photo = np.stack([
    128 + 90 * np.sin(xx / 60),
    128 + 90 * np.cos(yy / 45),
    128 + 90 * np.sin((xx + yy) / 80),
], axis=-1).clip(0, 255).astype(np.uint8)
source = workdir / "sunset.png"
Image.fromarray(photo).save(source)
print(f"source image: {source} ({photo.shape[1]}x{photo.shape[0]})")

# ---- a keyserver and an account --------------------------------------------
service = KeyService(KeyStore(str(workdir / "keys.db")))
service.register("alice", "correct horse battery staple")
client = LocalKeyserverClient(service)

# ---- publish: expires in one hour ------------------------------------------
job = PublishJob(
    inputs=[source],
    description="sunset album",
    keyserver_url="http://keys.example",
    profile=BUILTIN_PROFILES["facebook"],
    expdate=time.time() + 3600,
    mode=EmbedMode.BITS,
    output_dir=workdir / "protected",
)
result = publish(job, client, "alice", "correct horse battery staple")
protected = result.images[0].output
print(f"protected file: {protected} ({protected.stat().st_size // 1024} KiB)")
print(f"key id: {result.images[0].key_id.hex()}")

cover = jfif.parse_jfif(protected.read_bytes())
print(f"cover geometry: {cover.width}x{cover.height} "
      f"(what the target site stores without rescaling)")

# ---- view -------------------------------------------------------------------
view = view_bytes(protected.read_bytes(), lambda url: client)
decoded = workdir / "sunset.decrypted.jpg"
decoded.write_bytes(view.plaintext)
inner = jfif.parse_jfif(view.plaintext)
print(f"viewed via the {view.mode.value} route -> {decoded} "
      f"({inner.width}x{inner.height})")
print("ciphertext hash checked by the keyserver before the key was released.")
