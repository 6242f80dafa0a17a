import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extrapkit.errors import FormatError, InvalidInputError
from extrapkit.formats import (decode_pnm, decode_tensor, encode_pnm, encode_tensor,
                               read_any, read_manifest, write_any)

SMALL_2X2 = b"SMT1" + bytes([2, 2]) + struct.pack("<II", 2, 2) + struct.pack("<4H", 1, 2, 3, 65535)


@pytest.mark.parametrize("dtype", ["<f4", "<f8", "<u2", "<u4"])
def test_tensor_round_trip(dtype):
    rng = np.random.default_rng(1)
    arr = (rng.uniform(0, 1000, size=(3, 4, 2))).astype(dtype)
    out = decode_tensor(encode_tensor(arr))
    assert out.dtype == np.dtype(dtype).newbyteorder("=")
    np.testing.assert_array_equal(out, arr)


def test_known_bytes():
    assert len(SMALL_2X2) == 22
    out = decode_tensor(SMALL_2X2)
    np.testing.assert_array_equal(out, [[1, 2], [3, 65535]])
    assert encode_tensor(out) == SMALL_2X2


def test_truncated_by_one_byte():
    with pytest.raises(FormatError, match="truncated"):
        decode_tensor(SMALL_2X2[:-1])


def test_trailing_byte():
    with pytest.raises(FormatError, match="trailing"):
        decode_tensor(SMALL_2X2 + b"\0")


def test_bad_magic_and_code():
    with pytest.raises(FormatError, match="magic"):
        decode_tensor(b"SMT2" + SMALL_2X2[4:])
    with pytest.raises(FormatError, match="dtype"):
        decode_tensor(SMALL_2X2[:4] + b"\x07" + SMALL_2X2[5:])


def test_int64_labels_stored_as_u32():
    out = decode_tensor(encode_tensor(np.array([[0, 7]], dtype=np.int64)))
    assert out.dtype == np.uint32
    with pytest.raises(InvalidInputError):
        encode_tensor(np.array([-1]))


def test_zero_dim_and_empty():
    np.testing.assert_array_equal(decode_tensor(encode_tensor(np.float64(2.5))), 2.5)
    assert decode_tensor(encode_tensor(np.zeros((0, 3), np.float32))).shape == (0, 3)


def test_p6_red_blue():
    data = b"P6\n2 1\n255\n" + bytes([255, 0, 0, 0, 0, 255])
    out = decode_pnm(data)
    assert out.shape == (1, 2, 3) and out.dtype == np.uint8
    np.testing.assert_array_equal(out[0, 0], [255, 0, 0])
    np.testing.assert_array_equal(out[0, 1], [0, 0, 255])


def test_p5_16bit_round_trip():
    arr = np.array([[0, 300], [65535, 1]], dtype=np.uint16)
    data = encode_pnm(arr)
    assert b"65535" in data[:20]
    np.testing.assert_array_equal(decode_pnm(data), arr)


def test_p5_big_endian():
    data = b"P5 1 1 65535\n" + bytes([0x01, 0x02])
    assert decode_pnm(data)[0, 0] == 0x0102


def test_header_comments():
    data = b"P5\n# hi\n2 # w\n1\n255\n" + bytes([3, 4])
    np.testing.assert_array_equal(decode_pnm(data), [[3, 4]])


@pytest.mark.parametrize("data", [
    b"P6\n1 1\n1024\n" + bytes(6),
    b"P6\n1 1\n65535\n" + bytes(6),
    b"P3\n1 1\n255\n0 0 0",
    b"P5\n0 1\n255\n",
    b"P5\n1 x\n255\n\0",
    b"P5\n2 2\n255\n\0",
    b"P5\n1 1\n255",
])
def test_bad_pnm(data):
    with pytest.raises(FormatError):
        decode_pnm(data)


def test_format_error_reports_offset():
    with pytest.raises(FormatError, match="at byte 0"):
        decode_tensor(b"XXXX\0\0")


@settings(max_examples=300)
@given(st.data())
def test_corruptions_never_crash(data):
    base = data.draw(st.sampled_from([
        SMALL_2X2, encode_tensor(np.arange(6.0).reshape(2, 3)),
        b"P6\n2 1\n255\n" + bytes(6), encode_pnm(np.arange(4, dtype=np.uint16).reshape(2, 2) * 300)]))
    blob = bytearray(base)
    cut = data.draw(st.integers(0, len(blob)))
    blob = blob[:cut]
    for _ in range(data.draw(st.integers(0, 3))):
        if blob:
            i = data.draw(st.integers(0, len(blob) - 1))
            blob[i] = data.draw(st.integers(0, 255))
    decode = decode_pnm if base[:1] == b"P" else decode_tensor
    try:
        decode(bytes(blob))
    except FormatError:
        pass


def test_read_write_any(tmp_path):
    img = np.array([[[10, 20, 30]]], dtype=np.uint8)
    write_any(img, tmp_path / "a.ppm")
    np.testing.assert_array_equal(read_any(tmp_path / "a.ppm"), img)
    write_any(img.astype(np.float64), tmp_path / "a.smt")
    np.testing.assert_array_equal(read_any(tmp_path / "a.smt"), img)


def test_manifest(tmp_path):
    (tmp_path / "m.txt").write_text("# c\n\na.smt\n/abs/b.smt\n")
    assert read_manifest(tmp_path / "m.txt") == [str(tmp_path / "a.smt"), "/abs/b.smt"]
