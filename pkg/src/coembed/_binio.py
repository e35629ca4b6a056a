"""Small helpers for the binary snapshot and embedding file formats.

Everything is little-endian. Strings are UTF-8 with a u32 byte-length
prefix. Readers validate eagerly and raise DataError on any shortfall so
corruption is caught at load time, not deep inside training.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

from .errors import DataError


def write_u16(fh: BinaryIO, value: int) -> None:
    fh.write(struct.pack("<H", value))


def write_u32(fh: BinaryIO, value: int) -> None:
    fh.write(struct.pack("<I", value))


def write_u64(fh: BinaryIO, value: int) -> None:
    fh.write(struct.pack("<Q", value))


def write_str(fh: BinaryIO, text: str) -> None:
    raw = text.encode("utf-8")
    write_u32(fh, len(raw))
    fh.write(raw)


def _read_exact(fh: BinaryIO, n: int, what: str) -> bytes:
    raw = fh.read(n)
    if len(raw) != n:
        raise DataError(f"truncated file: expected {n} bytes for {what}, got {len(raw)}")
    return raw


def read_u16(fh: BinaryIO, what: str = "u16") -> int:
    return struct.unpack("<H", _read_exact(fh, 2, what))[0]


def read_u32(fh: BinaryIO, what: str = "u32") -> int:
    return struct.unpack("<I", _read_exact(fh, 4, what))[0]


def read_u64(fh: BinaryIO, what: str = "u64") -> int:
    return struct.unpack("<Q", _read_exact(fh, 8, what))[0]


def read_str(fh: BinaryIO, what: str = "string") -> str:
    n = read_u32(fh, f"{what} length")
    raw = _read_exact(fh, n, what)
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(f"invalid UTF-8 in {what}") from exc


def expect_magic(fh: BinaryIO, magic: bytes, kind: str) -> None:
    raw = fh.read(len(magic))
    if raw != magic:
        raise DataError(f"not a {kind} file: bad magic {raw!r}")


def write_matrix_f32(fh: BinaryIO, matrix: np.ndarray) -> None:
    # row-major float32, little-endian
    fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())


def read_matrix_f32(fh: BinaryIO, rows: int, cols: int, what: str) -> np.ndarray:
    raw = _read_exact(fh, rows * cols * 4, what)
    return np.frombuffer(raw, dtype="<f4").reshape(rows, cols)
