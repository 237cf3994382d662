"""The tempting idea that does not survive contact with real decoders.

If a site requantizes with table A, encode the upload with the reciprocal
table A' = 1/A: the site's dequantize-then-quantize pair cancels and the
embedded coefficients pass through untouched. Under exact real arithmetic
that is precisely what happens. Under the arithmetic of optimized integer
pipelines (legal integer tables, 8-bit sample rounding, fixed-point
transforms with truncating descale) the cancellation collapses, and no
practical error-correcting code can bridge the gap.

That failure is why the shipped scheme embeds guarded symbols in the
spatial domain instead.
"""
import numpy as np

from jpegexpire.profiles import BUILTIN_PROFILES
from jpegexpire.recompress import cancellation_experiment, inverse_quantization_table

fb = BUILTIN_PROFILES["facebook"]

print("site luminance table (top-left corner):")
print(fb.luma_quant[:4, :4])
inv = inverse_quantization_table(fb.luma_quant)
print("\nreciprocal table (same corner):")
print(np.array2string(inv[:4, :4], precision=3))
print(f"\nmax divisor {fb.luma_quant.max()} -> smallest reciprocal "
      f"{inv.min():.4f}; legal file tables hold integers 1..255, so every "
      f"reciprocal collapses to 1 the moment it is written to a real file.")

rng = np.random.default_rng(0)
payload = rng.integers(0, 256, 5000, dtype=np.uint8).tobytes()

exact = cancellation_experiment(payload, fb, "exact")
print(f"\nexact real arithmetic : byte error rate = {exact.ber:.4f}  "
      f"(the cancellation works perfectly)")

integer = cancellation_experiment(payload, fb, "integer")
print(f"integer pipeline      : byte error rate = {integer.ber:.4f}  "
      f"(more than half of all bytes destroyed)")

print(f"\nReed-Solomon (255,191) repairs at most 12.5% of a codeword; "
      f"{integer.ber:.0%} corruption is far beyond any reasonable code.")
