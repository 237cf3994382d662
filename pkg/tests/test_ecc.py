from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jpegexpire import rs
from jpegexpire.errors import RSDecodeFailure
from jpegexpire.gf256 import EXP, LOG, gf_div, gf_inv, gf_mul, poly_eval


# --- field properties ---

def _product_table() -> np.ndarray:
    a = np.arange(256)
    prod = np.zeros((256, 256), dtype=np.int64)
    la = LOG[a[1:, None]]
    lb = LOG[a[None, 1:]]
    prod[1:, 1:] = EXP[la + lb]
    return prod


def test_identity_and_inverse_exhaustive():
    prod = _product_table()
    assert (prod[1:, 1] == np.arange(1, 256)).all()          # a * 1 == a
    inv = np.array([gf_inv(a) for a in range(1, 256)])
    assert (prod[np.arange(1, 256), inv] == 1).all()         # a * a^-1 == 1
    assert (prod == prod.T).all()                            # commutativity


def test_distributivity_exhaustive_pairs():
    # a(b + c) == ab + ac checked for every (b, c) pair at several a values
    prod = _product_table()
    b = np.arange(256)[:, None]
    c = np.arange(256)[None, :]
    for a in (1, 2, 3, 29, 76, 142, 255):
        left = prod[a, b ^ c]
        right = prod[a, b] ^ prod[a, c]
        assert (left == right).all()


def test_division_is_inverse_of_multiplication():
    rng = np.random.default_rng(0)
    for _ in range(500):
        a, b = int(rng.integers(0, 256)), int(rng.integers(1, 256))
        assert gf_div(gf_mul(a, b), b) == a
    with pytest.raises(ZeroDivisionError):
        gf_div(5, 0)


# --- codec basics ---

def test_zero_data_gives_zero_codeword():
    assert rs.rs_encode(bytes(191)) == bytes(255)


def test_systematic_prefix():
    data = bytes(range(191))
    assert rs.rs_encode(data)[:191] == data


def test_codeword_evaluates_to_zero_at_generator_roots():
    # independent oracle: polynomial evaluation over the field helpers
    rng = np.random.default_rng(1)
    cw = rs.rs_encode(rng.integers(0, 256, 191, dtype=np.uint8).tobytes())
    low_first = list(cw[::-1])
    for j in range(1, 65):
        assert poly_eval(low_first, int(EXP[j])) == 0


def test_noiseless_roundtrip():
    rng = np.random.default_rng(2)
    data = rng.integers(0, 256, 191, dtype=np.uint8).tobytes()
    decoded, corrected = rs.rs_decode(rs.rs_encode(data))
    assert decoded == data and corrected == 0


def test_exactly_32_errors_recovered():
    rng = np.random.default_rng(3)
    data = rng.integers(0, 256, 191, dtype=np.uint8).tobytes()
    cw = bytearray(rs.rs_encode(data))
    pos = rng.choice(255, size=32, replace=False)
    for p in pos:
        cw[p] ^= int(rng.integers(1, 256))
    decoded, corrected = rs.rs_decode(bytes(cw))
    assert decoded == data and corrected == 32


def test_wrong_lengths_rejected():
    with pytest.raises(ValueError):
        rs.rs_encode(bytes(190))
    with pytest.raises(ValueError):
        rs.rs_decode(bytes(254))


@settings(max_examples=60, deadline=None)
@given(data=st.binary(min_size=191, max_size=191),
       n_errors=st.integers(0, 32),
       seed=st.integers(0, 2**31))
def test_any_error_pattern_up_to_32_recovered(data, n_errors, seed):
    rng = np.random.default_rng(seed)
    cw = bytearray(rs.rs_encode(data))
    pos = rng.choice(255, size=n_errors, replace=False)
    for p in pos:
        cw[p] ^= int(rng.integers(1, 256))
    decoded, corrected = rs.rs_decode(bytes(cw))
    assert decoded == data
    assert corrected == n_errors


def test_heavy_corruption_detected():
    rng = np.random.default_rng(4)
    failures = 0
    trials = 200
    for _ in range(trials):
        data = rng.integers(0, 256, 191, dtype=np.uint8).tobytes()
        cw = bytearray(rs.rs_encode(data))
        pos = rng.choice(255, size=40, replace=False)
        for p in pos:
            cw[p] ^= int(rng.integers(1, 256))
        try:
            rs.rs_decode(bytes(cw))
        except RSDecodeFailure:
            failures += 1
    assert failures >= trials * 0.99


# --- streams ---

def test_stream_lengths():
    assert rs.rs_encode_stream(b"") == b""
    assert len(rs.rs_encode_stream(bytes(191))) == 255
    assert len(rs.rs_encode_stream(bytes(382))) == 510
    assert len(rs.rs_encode_stream(bytes(200))) == 510  # padded final chunk


def test_stream_roundtrip_with_length():
    rng = np.random.default_rng(5)
    for n in (1, 190, 191, 192, 1000):
        payload = rng.integers(0, 256, n, dtype=np.uint8).tobytes()
        coded = rs.rs_encode_stream(payload)
        assert rs.rs_decode_stream(coded, length=n) == payload
    assert rs.rs_decode_stream(b"") == b""
    with pytest.raises(ValueError):
        rs.rs_decode_stream(bytes(100))


def test_stream_repairs_scattered_errors():
    rng = np.random.default_rng(6)
    payload = rng.integers(0, 256, 191 * 5, dtype=np.uint8).tobytes()
    coded = bytearray(rs.rs_encode_stream(payload))
    for cw in range(5):
        pos = rng.choice(255, size=20, replace=False)
        for p in pos:
            coded[cw * 255 + p] ^= int(rng.integers(1, 256))
    assert rs.rs_decode_stream(bytes(coded), length=len(payload)) == payload


def test_code_rate_matches_three_sixteenths_of_pixels():
    # 2 bits/pixel at rate 191/255 leaves just under 3/16 of the original
    # 8 bits/pixel; the 3/16 figure is the rounded form (64 parity of 256)
    rate = (2 / 8) * (rs.K / rs.N)
    assert abs(rate - 3 / 16) < 0.002
    assert (2 / 8) * (192 / 256) == 3 / 16
