"""Flat binary serialization for kernel parameter sets.

Layout (all integers little-endian):

    magic   4 bytes  b"CSTM"
    version u32      currently 1
    count   u32      number of named arrays
    entry*  name_len u16 | name utf-8 | ndim u32 | dims u64 * ndim
            | float64 data, C order, little-endian

Array order is preserved, so round-trips are byte-stable.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"CSTM"
VERSION = 1


def dump_arrays(arrays: dict[str, np.ndarray]) -> bytes:
    chunks = [MAGIC, struct.pack("<II", VERSION, len(arrays))]
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr, dtype="<f8")
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<I", arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        chunks.append(arr.tobytes())
    return b"".join(chunks)


def load_arrays(blob: bytes) -> dict[str, np.ndarray]:
    if blob[:4] != MAGIC:
        raise ValueError("bad magic bytes; not a kernel parameter file")
    version, count = struct.unpack_from("<II", blob, 4)
    if version != VERSION:
        raise ValueError(f"unsupported version {version}")
    offset = 12
    arrays: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        name = blob[offset:offset + name_len].decode("utf-8")
        offset += name_len
        (ndim,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        shape = struct.unpack_from(f"<{ndim}Q", blob, offset)
        offset += 8 * ndim
        size = int(np.prod(shape)) if ndim else 1
        data = np.frombuffer(blob, dtype="<f8", count=size, offset=offset)
        offset += 8 * size
        arrays[name] = data.reshape(shape).astype(np.float64)
    if offset != len(blob):
        raise ValueError("trailing bytes after last array")
    return arrays


def save_params_file(path: str | Path, arrays: dict[str, np.ndarray]) -> None:
    Path(path).write_bytes(dump_arrays(arrays))


def load_params_file(path: str | Path) -> dict[str, np.ndarray]:
    return load_arrays(Path(path).read_bytes())
