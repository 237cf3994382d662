"""The whole point: keys stop being served when you say so.

Uses an injected clock, so the demo fast-forwards time instead of sleeping.
"""
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from jpegexpire.errors import RecordExpiredError
from jpegexpire.keyserver import KeyService, KeyStore
from jpegexpire.keyserver.client import LocalKeyserverClient
from jpegexpire.profiles import BUILTIN_PROFILES
from jpegexpire.publish import PublishJob, publish, view_bytes
from jpegexpire.stego import EmbedMode


class Clock:
    def __init__(self):
        self.now = 1_700_000_000.0
    def __call__(self):
        return self.now


clock = Clock()
service = KeyService(KeyStore(":memory:"), clock=clock)
service.register("alice", "pw")
client = LocalKeyserverClient(service)

workdir = Path(tempfile.mkdtemp(prefix="jpegexpire-demo-"))
source = workdir / "pic.png"
rng = np.random.default_rng(1)
Image.fromarray(rng.integers(0, 256, (300, 400, 3), dtype=np.uint8)).save(source)

job = PublishJob(
    inputs=[source], description="ephemeral",
    keyserver_url="http://keys.example",
    profile=BUILTIN_PROFILES["facebook"],
    expdate=clock.now + 7 * 24 * 3600,     # one week
    mode=EmbedMode.HEADER,                 # fast route for the demo
    output_dir=workdir,
)
res = publish(job, client, "alice", "pw")
blob = res.images[0].output.read_bytes()
key_id = res.images[0].key_id
print(f"published with a one-week expiration (key {key_id.hex()[:16]}...)")


def try_view(label):
    try:
        view_bytes(blob, lambda url: client)
        print(f"  {label}: key served, image decrypts")
    except RecordExpiredError:
        print(f"  {label}: EXPIRED, keyserver refuses the key")


try_view("day 0")
clock.now += 3 * 24 * 3600
try_view("day 3")
clock.now += 5 * 24 * 3600
try_view("day 8 (past the week)")

print("\nrewinding the demo clock and extending the date instead:")
clock.now -= 5 * 24 * 3600
client.update_expiration("alice", "pw", key_id, clock.now + 30 * 24 * 3600)
try_view("day 3 after extension to +30d")

print("\nand the kill switch, effective on the very next request:")
client.update_expiration("alice", "pw", key_id, clock.now)
try_view("immediately after 'expires now'")
