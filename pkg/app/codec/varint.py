"""
Little-endian primitives and Bitcoin-style CompactSize varints shared by the
binary stream codec and the snapshot format.
"""

import struct
from typing import BinaryIO

_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")


class ShortRead(Exception):
    """Raised by ByteReader when the underlying stream ends early."""


def encode_varint(value: int) -> bytes:
    if value < 0:
        raise ValueError("varint must be non-negative")
    if value < 0xFD:
        return bytes((value,))
    if value <= 0xFFFF:
        return b"\xfd" + _U16.pack(value)
    if value <= 0xFFFFFFFF:
        return b"\xfe" + _U32.pack(value)
    return b"\xff" + _U64.pack(value)


def write_bytes(buf: bytearray, data: bytes) -> None:
    """Append a varint length prefix followed by data."""
    buf += encode_varint(len(data))
    buf += data


class ByteReader:
    """Sequential reader over a binary stream with exact-length reads."""

    def __init__(self, stream: BinaryIO):
        self._stream = stream

    def read_exact(self, n: int) -> bytes:
        data = self._stream.read(n)
        if len(data) != n:
            raise ShortRead(f"wanted {n} bytes, got {len(data)}")
        return data

    def at_eof(self) -> bool:
        peek = getattr(self._stream, "peek", None)
        if peek is not None:
            return not peek(1)
        pos = self._stream.tell()
        data = self._stream.read(1)
        if not data:
            return True
        self._stream.seek(pos)
        return False

    def u8(self) -> int:
        return self.read_exact(1)[0]

    def u16(self) -> int:
        return _U16.unpack(self.read_exact(2))[0]

    def u32(self) -> int:
        return _U32.unpack(self.read_exact(4))[0]

    def u64(self) -> int:
        return _U64.unpack(self.read_exact(8))[0]

    def varint(self) -> int:
        first = self.u8()
        if first < 0xFD:
            return first
        if first == 0xFD:
            return self.u16()
        if first == 0xFE:
            return self.u32()
        return self.u64()

    def var_bytes(self) -> bytes:
        return self.read_exact(self.varint())


def pack_u16(value: int) -> bytes:
    return _U16.pack(value)


def pack_u32(value: int) -> bytes:
    return _U32.pack(value)


def pack_u64(value: int) -> bytes:
    return _U64.pack(value)
