"""GF(256) arithmetic used by the Reed-Solomon codec.

Field generated by the primitive polynomial x^8 + x^4 + x^3 + x^2 + 1
(0x11D). Multiplication and division go through log/antilog tables; the
exp table is doubled so hot paths can skip the mod-255 reduction.
"""
from __future__ import annotations

import numpy as np

PRIMITIVE_POLY = 0x11D


def _build_tables() -> tuple[np.ndarray, np.ndarray]:
    exp = np.zeros(512, dtype=np.uint8)
    log = np.zeros(256, dtype=np.int32)
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= PRIMITIVE_POLY
    exp[255:510] = exp[:255]
    return exp, log


EXP, LOG = _build_tables()


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return int(EXP[LOG[a] + LOG[b]])


def gf_div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by zero in GF(256)")
    if a == 0:
        return 0
    return int(EXP[(LOG[a] - LOG[b]) % 255])


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("zero has no inverse in GF(256)")
    return int(EXP[255 - LOG[a]])


def gf_pow(a: int, n: int) -> int:
    if a == 0:
        return 0 if n > 0 else 1
    return int(EXP[(LOG[a] * n) % 255])


def poly_mul(a: list[int], b: list[int]) -> list[int]:
    """Multiply polynomials with coefficients low degree first."""
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] ^= gf_mul(ai, bj)
    return out


def poly_eval(p: list[int], x: int) -> int:
    """Evaluate a polynomial (low degree first) at x by Horner's rule."""
    acc = 0
    for c in reversed(p):
        acc = gf_mul(acc, x) ^ c
    return acc
