"""Fixed-stride binary store of extracted codemaps (magic ``SPIN``).

Little-endian layout: magic, u32 version, u32 count, u16 F_top, u16 T_top,
u16 F_bot, u16 T_bot, u16 K; then per record u32 id, u8 pitch, u8
instrument, top codes as u16 (frequency-major), bottom codes likewise.
The constant record stride gives O(1) access by index.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError, InvalidStoreError

MAGIC = b"SPIN"
VERSION = 1
_HEADER = struct.Struct("<4sII5H")
_RECORD_HEAD = struct.Struct("<IBB")


@dataclass
class CodemapRecord:
    id: int
    pitch: int
    instrument: int
    top: np.ndarray
    bottom: np.ndarray


def record_stride(top_shape, bottom_shape) -> int:
    cells = top_shape[0] * top_shape[1] + bottom_shape[0] * bottom_shape[1]
    return _RECORD_HEAD.size + 2 * cells


class CodemapStoreWriter:
    def __init__(self, path: str, top_shape, bottom_shape, n_codes: int):
        self.path = path
        self.top_shape = tuple(top_shape)
        self.bottom_shape = tuple(bottom_shape)
        self.n_codes = n_codes
        self._count = 0
        self._f = open(path, "wb")
        self._write_header()

    def _write_header(self):
        self._f.write(
            _HEADER.pack(
                MAGIC, VERSION, self._count,
                self.top_shape[0], self.top_shape[1],
                self.bottom_shape[0], self.bottom_shape[1], self.n_codes,
            )
        )

    def append(self, record: CodemapRecord) -> None:
        top = np.asarray(record.top)
        bottom = np.asarray(record.bottom)
        if top.shape != self.top_shape or bottom.shape != self.bottom_shape:
            raise InvalidInputError("record shapes do not match the store header")
        if top.max(initial=0) >= self.n_codes or bottom.max(initial=0) >= self.n_codes:
            raise InvalidInputError("code value outside [0, K)")
        self._f.write(_RECORD_HEAD.pack(record.id, record.pitch, record.instrument))
        self._f.write(top.astype("<u2").tobytes())
        self._f.write(bottom.astype("<u2").tobytes())
        self._count += 1

    def close(self) -> None:
        self._f.seek(0)
        self._write_header()
        self._f.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class CodemapStore:
    """Random-access reader over a SPIN file."""

    def __init__(self, path: str):
        self.path = path
        with open(path, "rb") as f:
            header = f.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise InvalidStoreError(f"{path}: truncated header")
        magic, version, count, f_top, t_top, f_bot, t_bot, n_codes = _HEADER.unpack(header)
        if magic != MAGIC:
            raise InvalidStoreError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise InvalidStoreError(f"{path}: unsupported version {version}")
        self.count = count
        self.top_shape = (f_top, t_top)
        self.bottom_shape = (f_bot, t_bot)
        self.n_codes = n_codes
        self._stride = record_stride(self.top_shape, self.bottom_shape)
        expected = _HEADER.size + count * self._stride
        actual = os.path.getsize(path)
        if actual != expected:
            raise InvalidStoreError(f"{path}: size {actual} != header-implied {expected}")
        self._f = open(path, "rb")

    def __len__(self) -> int:
        return self.count

    def __getitem__(self, index: int) -> CodemapRecord:
        if not 0 <= index < self.count:
            raise IndexError(index)
        self._f.seek(_HEADER.size + index * self._stride)
        blob = self._f.read(self._stride)
        rec_id, pitch, instrument = _RECORD_HEAD.unpack_from(blob, 0)
        n_top = self.top_shape[0] * self.top_shape[1]
        top = np.frombuffer(blob, dtype="<u2", count=n_top, offset=_RECORD_HEAD.size)
        bottom = np.frombuffer(blob, dtype="<u2", count=self.bottom_shape[0] * self.bottom_shape[1],
                               offset=_RECORD_HEAD.size + 2 * n_top)
        return CodemapRecord(
            id=rec_id, pitch=pitch, instrument=instrument,
            top=top.reshape(self.top_shape).astype(np.int64),
            bottom=bottom.reshape(self.bottom_shape).astype(np.int64),
        )

    def close(self) -> None:
        self._f.close()

    def grids(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """All records as stacked arrays (tops, bottoms, pitches, instruments)."""
        tops = np.empty((self.count, *self.top_shape), dtype=np.int64)
        bottoms = np.empty((self.count, *self.bottom_shape), dtype=np.int64)
        pitches = np.empty(self.count, dtype=np.int64)
        instruments = np.empty(self.count, dtype=np.int64)
        for i in range(self.count):
            rec = self[i]
            tops[i], bottoms[i] = rec.top, rec.bottom
            pitches[i], instruments[i] = rec.pitch, rec.instrument
        return tops, bottoms, pitches, instruments


def open_store(path: str) -> CodemapStore:
    return CodemapStore(path)
