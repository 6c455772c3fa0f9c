"""Binary checkpoint format for named parameter sets.

Layout (little-endian): magic ``SPNN``, u32 version, then per parameter:
u16 name length, UTF-8 name, u8 rank, u32 per dimension, float32 values.
"""

from __future__ import annotations

import struct
from collections import OrderedDict

import numpy as np

from ..errors import InvalidInputError

MAGIC = b"SPNN"
VERSION = 1


def save_params(path: str, arrays: dict[str, np.ndarray]) -> None:
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        for name, arr in arrays.items():
            encoded = name.encode("utf-8")
            arr = np.asarray(arr, dtype="<f4")
            f.write(struct.pack("<H", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<B", arr.ndim))
            f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            f.write(arr.tobytes())


def load_params(path: str) -> "OrderedDict[str, np.ndarray]":
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != MAGIC:
        raise InvalidInputError(f"{path}: bad checkpoint magic {blob[:4]!r}")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != VERSION:
        raise InvalidInputError(f"{path}: unsupported checkpoint version {version}")

    out: OrderedDict[str, np.ndarray] = OrderedDict()
    offset = 8
    try:
        while offset < len(blob):
            (name_len,) = struct.unpack_from("<H", blob, offset)
            offset += 2
            name = blob[offset : offset + name_len].decode("utf-8")
            offset += name_len
            (rank,) = struct.unpack_from("<B", blob, offset)
            offset += 1
            dims = struct.unpack_from(f"<{rank}I", blob, offset)
            offset += 4 * rank
            count = int(np.prod(dims, dtype=np.int64)) if rank else 1
            end = offset + 4 * count
            if end > len(blob):
                raise InvalidInputError(f"{path}: truncated checkpoint (record {name!r})")
            arr = np.frombuffer(blob[offset:end], dtype="<f4").reshape(dims).copy()
            offset = end
            out[name] = arr
    except (struct.error, UnicodeDecodeError) as exc:
        raise InvalidInputError(f"{path}: corrupt checkpoint: {exc}") from exc
    return out
