"""
Binary transaction stream.

    "ACLS" | version u16 | record_count u64 | records...

record_count is 0 when unknown, in which case records run to end of stream.
Each record: txid 32B | time u32 | in-count varint | (txid 32B, vout u32)* |
out-count varint | (sat u64, cls u8 [m u8, n u8], addr-count varint, (len varint, bytes)*)*
"""

import logging
from collections.abc import Sized
from typing import BinaryIO, Iterable, Iterator, Set

from app.codec.varint import ByteReader, ShortRead, encode_varint, pack_u16, pack_u32, pack_u64, write_bytes
from app.core.exceptions import BadMagic, BadVersion, CodecError, DuplicateTxid, TruncatedRecord, ValidationError
from app.core.models import OutPoint, ScriptClass, ScriptKind, TxOutputDecl, TxRecord, validate

logger = logging.getLogger(__name__)

MAGIC = b"ACLS"
VERSION = 1
HEADER_SIZE = 14
MAX_U32 = 0xFFFFFFFF


def _encode_record(buf: bytearray, tx: TxRecord) -> None:
    if tx.timestamp > MAX_U32:
        raise CodecError(f"record {tx.ordinal}: timestamp {tx.timestamp} does not fit the binary u32 time field")
    buf += tx.txid
    buf += pack_u32(tx.timestamp)
    buf += encode_varint(len(tx.inputs))
    for outpoint in tx.inputs:
        buf += outpoint.txid
        buf += pack_u32(outpoint.vout)
    buf += encode_varint(len(tx.outputs))
    for output in tx.outputs:
        buf += pack_u64(output.value)
        script_class = output.script_class
        buf.append(int(script_class.kind))
        if script_class.kind is ScriptKind.MULTISIG:
            if script_class.n > 0xFF:
                raise CodecError(f"record {tx.ordinal}: multisig n={script_class.n} exceeds u8")
            buf.append(script_class.m)
            buf.append(script_class.n)
        buf += encode_varint(len(output.addresses))
        for address in output.addresses:
            write_bytes(buf, address.encode("utf-8"))


def encode_header(record_count: int = 0) -> bytes:
    return MAGIC + pack_u16(VERSION) + pack_u64(record_count)


def encode_binary(records: Iterable[TxRecord]) -> bytes:
    """Serialize records; the header carries the count when records is sized."""
    if not isinstance(records, Sized):
        records = list(records)
    buf = bytearray(encode_header(len(records)))
    for tx in records:
        _encode_record(buf, tx)
    return bytes(buf)


def write_binary(stream: BinaryIO, records: Iterable[TxRecord], record_count: int = 0) -> int:
    """Stream records to a binary file object; record_count=0 marks the count unknown."""
    stream.write(encode_header(record_count))
    written = 0
    for tx in records:
        buf = bytearray()
        _encode_record(buf, tx)
        stream.write(buf)
        written += 1
    if record_count and written != record_count:
        raise CodecError(f"header declared {record_count} records but {written} were written")
    return written


def _read_script_class(reader: ByteReader, ordinal: int) -> ScriptClass:
    tag = reader.u8()
    try:
        kind = ScriptKind(tag)
    except ValueError as e:
        raise CodecError(f"record {ordinal}: unknown script class tag {tag}") from e
    if kind is ScriptKind.MULTISIG:
        m, n = reader.u8(), reader.u8()
        try:
            return ScriptClass.multisig(m, n)
        except ValidationError as e:
            raise ValidationError(str(e), ordinal=ordinal) from e
    return ScriptClass(kind)


def _read_record(reader: ByteReader, ordinal: int) -> TxRecord:
    txid = reader.read_exact(32)
    timestamp = reader.u32()
    inputs = tuple(OutPoint(reader.read_exact(32), reader.u32()) for _ in range(reader.varint()))
    outputs = []
    for _ in range(reader.varint()):
        value = reader.u64()
        script_class = _read_script_class(reader, ordinal)
        addresses = []
        for _ in range(reader.varint()):
            raw = reader.var_bytes()
            try:
                addresses.append(raw.decode("utf-8"))
            except UnicodeDecodeError as e:
                raise CodecError(f"record {ordinal}: address is not valid UTF-8") from e
        outputs.append(TxOutputDecl(value, script_class, tuple(addresses)))
    return TxRecord(txid, timestamp, ordinal, inputs, tuple(outputs))


def parse_binary(stream: BinaryIO, start_ordinal: int = 0) -> Iterator[TxRecord]:
    """Yield validated records in stream order, assigning ordinals from start_ordinal."""
    reader = ByteReader(stream)
    try:
        magic = reader.read_exact(4)
    except ShortRead as e:
        raise BadMagic("stream shorter than the header magic") from e
    if magic != MAGIC:
        raise BadMagic(f"expected magic {MAGIC!r}, got {magic!r}")
    try:
        version = reader.u16()
        record_count = reader.u64()
    except ShortRead as e:
        raise TruncatedRecord(start_ordinal, "stream truncated inside the header") from e
    if version != VERSION:
        raise BadVersion(f"unsupported stream version {version} (expected {VERSION})")

    seen: Set[bytes] = set()
    index = 0
    while True:
        if record_count:
            if index == record_count:
                break
        elif reader.at_eof():
            break
        ordinal = start_ordinal + index
        try:
            tx = _read_record(reader, ordinal)
        except ShortRead as e:
            raise TruncatedRecord(ordinal) from e
        validate(tx)
        if tx.txid in seen:
            raise DuplicateTxid(tx.txid, ordinal=ordinal)
        seen.add(tx.txid)
        index += 1
        yield tx
