"""SMT1 tensor files and binary netpbm (P5/P6) images.

SMT1 layout: ``b"SMT1"``, dtype code (u8), ndim (u8), ``ndim`` little-endian
u32 dims, then the row-major little-endian payload. Nothing may follow the
payload.
"""

from __future__ import annotations

import math
import os
import struct

import numpy as np

from .errors import FormatError, InvalidInputError

MAGIC = b"SMT1"
DTYPES = {
    0: np.dtype("<f4"),
    1: np.dtype("<f8"),
    2: np.dtype("<u2"),
    3: np.dtype("<u4"),
}
CODES = {dt.newbyteorder("="): code for code, dt in DTYPES.items()}


def encode_tensor(arr, dtype=None) -> bytes:
    arr = np.asarray(arr)
    if dtype is not None:
        arr = arr.astype(dtype)
    elif arr.dtype == np.bool_ or (np.issubdtype(arr.dtype, np.integer)
                                   and arr.dtype not in (np.uint16, np.uint32)):
        if arr.size and (arr.min() < 0 or arr.max() > 0xFFFFFFFF):
            raise InvalidInputError("integer values do not fit uint32")
        arr = arr.astype(np.uint32)
    code = CODES.get(arr.dtype.newbyteorder("="))
    if code is None:
        raise InvalidInputError(f"dtype {arr.dtype} has no SMT1 code")
    if arr.ndim > 255:
        raise InvalidInputError("too many dimensions")
    header = MAGIC + struct.pack("<BB", code, arr.ndim) + struct.pack(f"<{arr.ndim}I", *arr.shape)
    return header + np.ascontiguousarray(arr, dtype=DTYPES[code]).tobytes()


def decode_tensor(data: bytes) -> np.ndarray:
    if len(data) < 6:
        raise FormatError("truncated SMT1 header", len(data))
    if data[:4] != MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}", 0)
    code, ndim = data[4], data[5]
    if code not in DTYPES:
        raise FormatError(f"unknown dtype code {code}", 4)
    end = 6 + 4 * ndim
    if len(data) < end:
        raise FormatError(f"truncated dims: need {end} header bytes", len(data))
    dims = struct.unpack(f"<{ndim}I", data[6:end])
    dt = DTYPES[code]
    count = math.prod(dims)
    need = end + count * dt.itemsize
    if len(data) < need:
        raise FormatError(f"truncated payload: need {need} bytes, have {len(data)}", len(data))
    if len(data) > need:
        raise FormatError(f"{len(data) - need} trailing bytes after payload", need)
    arr = np.frombuffer(data, dtype=dt, offset=end, count=count).reshape(dims)
    return arr.astype(dt.newbyteorder("="))


def write_tensor(arr, path, dtype=None) -> None:
    with open(path, "wb") as f:
        f.write(encode_tensor(arr, dtype))


def read_tensor(path) -> np.ndarray:
    with open(path, "rb") as f:
        return decode_tensor(f.read())


def _header_tokens(data: bytes, count: int):
    """Return ``count`` whitespace-separated header tokens and the raster offset."""
    tokens = []
    i = 0
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i:i + 1].isspace():
            i += 1
        if i < n and data[i:i + 1] == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        if i >= n:
            raise FormatError("truncated netpbm header", i)
        start = i
        while i < n and not data[i:i + 1].isspace() and data[i:i + 1] != b"#":
            i += 1
        tokens.append((data[start:i], start))
    if i >= n or not data[i:i + 1].isspace():
        raise FormatError("missing whitespace after netpbm header", i)
    return tokens, i + 1


def decode_pnm(data: bytes) -> np.ndarray:
    """Parse binary P5/P6; returns (H, W) or (H, W, 3) as uint8/uint16."""
    if data[:2] not in (b"P5", b"P6"):
        raise FormatError(f"unsupported netpbm magic {data[:2]!r}", 0)
    channels = 3 if data[:2] == b"P6" else 1
    if not data[2:3].isspace():
        raise FormatError("missing whitespace after netpbm magic", 2)
    tokens, offset = _header_tokens(data[2:], 3)
    offset += 2
    values = []
    for tok, pos in tokens:
        if not tok.isdigit():
            raise FormatError(f"non-numeric header field {tok!r}", pos + 2)
        values.append(int(tok))
    width, height, maxval = values
    if width < 1 or height < 1:
        raise FormatError(f"degenerate image size {width}x{height}", tokens[0][1] + 2)
    allowed = (255,) if channels == 3 else (255, 65535)
    if maxval not in allowed:
        raise FormatError(f"unsupported maxval {maxval}", tokens[2][1] + 2)
    dt = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height * channels
    need = offset + count * dt.itemsize
    if len(data) < need:
        raise FormatError(f"truncated raster: need {need} bytes, have {len(data)}", len(data))
    if len(data) > need:
        raise FormatError(f"{len(data) - need} trailing bytes after raster", need)
    arr = np.frombuffer(data, dtype=dt, offset=offset, count=count)
    shape = (height, width, 3) if channels == 3 else (height, width)
    return arr.reshape(shape).astype(dt.newbyteorder("="))


def encode_pnm(arr, maxval: int | None = None) -> bytes:
    arr = np.asarray(arr)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[..., 0]
    if arr.ndim == 3 and arr.shape[2] == 3:
        magic = b"P6"
    elif arr.ndim == 2:
        magic = b"P5"
    else:
        raise InvalidInputError(f"cannot store shape {arr.shape} as netpbm")
    if np.issubdtype(arr.dtype, np.floating):
        arr = np.rint(arr)
    if arr.size and (arr.min() < 0 or not np.all(np.isfinite(arr))):
        raise InvalidInputError("netpbm pixels must be finite and non-negative")
    if maxval is None:
        maxval = 255 if (arr.dtype == np.uint8 or arr.max() <= 255) else 65535
    if maxval not in ((255,) if magic == b"P6" else (255, 65535)):
        raise InvalidInputError(f"unsupported maxval {maxval} for {magic.decode()}")
    if arr.size and arr.max() > maxval:
        raise InvalidInputError(f"pixel value {arr.max()} exceeds maxval {maxval}")
    dt = ">u2" if maxval > 255 else "u1"
    h, w = arr.shape[:2]
    header = b"%s\n%d %d\n%d\n" % (magic, w, h, maxval)
    return header + arr.astype(dt).tobytes()


def write_image_pnm(arr, path, maxval: int | None = None) -> None:
    with open(path, "wb") as f:
        f.write(encode_pnm(arr, maxval))


def read_image_pnm(path) -> np.ndarray:
    with open(path, "rb") as f:
        return decode_pnm(f.read())


def read_any(path) -> np.ndarray:
    """Dispatch on extension: .ppm/.pgm/.pnm as netpbm, everything else SMT1."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".ppm", ".pgm", ".pnm"):
        return read_image_pnm(path)
    return read_tensor(path)


def write_any(arr, path) -> None:
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".ppm", ".pgm", ".pnm"):
        write_image_pnm(np.clip(np.asarray(arr), 0, None), path)
    else:
        write_tensor(arr, path)


def read_manifest(path) -> list[str]:
    """Newline-delimited paths; blank lines and ``#`` comments are skipped.
    Relative entries resolve against the manifest's directory."""
    base = os.path.dirname(os.path.abspath(path))
    out = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line and not line.startswith("#"):
                out.append(line if os.path.isabs(line) else os.path.join(base, line))
    return out
