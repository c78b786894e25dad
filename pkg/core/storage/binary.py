"""
Little-endian binary record helpers with a CRC32 trailer.

Every checkpoint format in this package is a flat sequence of fixed-width
fields followed by the CRC32 of all preceding bytes. ``BinaryWriter`` collects
the fields, ``BinaryReader`` walks them back and raises CorruptSnapshotError on
any truncation, bad magic, unknown version or checksum mismatch.
"""
import struct
import zlib
from pathlib import Path
from typing import Union

import numpy as np

from core.exceptions import CorruptSnapshotError

PathLike = Union[str, Path]

F64 = np.dtype("<f8")
_CRC = struct.Struct("<I")


class BinaryWriter:
    """Accumulates little-endian fields; ``finish`` appends the checksum."""

    def __init__(self, magic: bytes, version: int):
        self._parts = [magic, struct.pack("<I", version)]

    def u8(self, value: int) -> "BinaryWriter":
        self._parts.append(struct.pack("<B", value))
        return self

    def u32(self, value: int) -> "BinaryWriter":
        self._parts.append(struct.pack("<I", value))
        return self

    def u64(self, value: int) -> "BinaryWriter":
        self._parts.append(struct.pack("<Q", value))
        return self

    def f64(self, value: float) -> "BinaryWriter":
        self._parts.append(struct.pack("<d", value))
        return self

    def f64_array(self, values: np.ndarray) -> "BinaryWriter":
        """Row-major float64 payload."""
        self._parts.append(np.ascontiguousarray(values, dtype=F64).tobytes(order="C"))
        return self

    def finish(self) -> bytes:
        body = b"".join(self._parts)
        return body + _CRC.pack(zlib.crc32(body) & 0xFFFFFFFF)


class BinaryReader:
    """Sequential reader over a checksummed record."""

    def __init__(self, data: bytes, magic: bytes, supported_version: int):
        if len(data) < len(magic) + 4 + _CRC.size:
            raise CorruptSnapshotError("file is truncated")
        body, trailer = data[:-_CRC.size], data[-_CRC.size:]
        if body[:len(magic)] != magic:
            raise CorruptSnapshotError(f"bad magic {body[:len(magic)]!r}, expected {magic!r}")
        (expected,) = _CRC.unpack(trailer)
        if zlib.crc32(body) & 0xFFFFFFFF != expected:
            raise CorruptSnapshotError("checksum mismatch")
        self._data = body
        self._offset = len(magic)
        self.version = self.u32()
        if self.version != supported_version:
            raise CorruptSnapshotError(
                f"unsupported format version {self.version}, expected {supported_version}"
            )

    def _take(self, size: int) -> bytes:
        end = self._offset + size
        if end > len(self._data):
            raise CorruptSnapshotError("record ends before all fields were read")
        chunk = self._data[self._offset:end]
        self._offset = end
        return chunk

    def u8(self) -> int:
        return struct.unpack("<B", self._take(1))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self._take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self._take(8))[0]

    def f64_array(self, *shape: int) -> np.ndarray:
        count = int(np.prod(shape)) if shape else 0
        raw = self._take(count * F64.itemsize)
        return np.frombuffer(raw, dtype=F64).astype(np.float64).reshape(shape)

    def expect_end(self) -> None:
        if self._offset != len(self._data):
            raise CorruptSnapshotError(
                f"{len(self._data) - self._offset} unexpected trailing bytes"
            )


def write_bytes_atomic(path: PathLike, payload: bytes) -> Path:
    """Write via a temporary sibling and rename, so readers never see half a file."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_suffix(target.suffix + ".tmp")
    tmp.write_bytes(payload)
    tmp.replace(target)
    return target
