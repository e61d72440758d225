"""
Engine snapshot and restore.

    "ACSN" | version u16 | section* | crc32 u32

Each section is a 4-byte ASCII tag, a u64 payload length and the payload.
Integer arrays are little-endian int64. The CRC32 covers every byte before
the trailer. Restoring a snapshot and processing the remaining stream gives
the same engine state as processing the whole stream at once.
"""

import io
import json
import logging
import os
import tempfile
import zlib
from pathlib import Path
from typing import Dict, List, Union

import numpy as np

from app.codec.varint import ByteReader, ShortRead, encode_varint, pack_u16, pack_u32, pack_u64
from app.core.exceptions import CorruptSnapshot, ValidationError, VersionMismatch
from app.core.models import MergeEvent, OutPoint, ScriptClass, ScriptKind
from app.services.cluster_engine import ClusterEngine, OutpointEntry

logger = logging.getLogger(__name__)

MAGIC = b"ACSN"
VERSION = 2

_INT_ARRAYS = {
    # tag: (owner, attribute)
    b"PRNT": ("state", "parent"),
    b"SIZE": ("state", "size"),
    b"MINM": ("state", "minimum"),
    b"CBAL": ("engine", "current_balance"),
    b"MBAL": ("engine", "max_balance"),
    b"TIME": ("log", "timestamps"),
    b"NEWA": ("log", "new_address_count"),
    b"ADDC": ("log", "addressable_output_count"),
    b"INPC": ("log", "input_count"),
    b"AINC": ("log", "addressed_input_count"),
    b"SPOF": ("log", "spend_offsets"),
    b"SPAD": ("log", "spend_addresses"),
    b"OUOF": ("log", "output_offsets"),
    b"OUVL": ("log", "output_values"),
    b"OAOF": ("log", "output_addr_offsets"),
    b"OAID": ("log", "output_addr_ids"),
    b"R2OR": ("log", "reach2_ordinals"),
}

_FLAG_ARRAYS = {
    b"FCBS": "is_coinbase",
    b"FNTR": "is_nontrivial",
    b"FMRG": "caused_merge",
}

SECTION_ORDER = [b"META", b"ADDR", *_INT_ARRAYS, *_FLAG_ARRAYS, b"TXID", b"OUTP", b"MERG"]


def _owner(engine: ClusterEngine, name: str):
    return {"engine": engine, "state": engine.state, "log": engine.log}[name]


def _pack_ints(values: List[int]) -> bytes:
    return np.asarray(values, dtype="<i8").tobytes()


def _unpack_ints(payload: bytes, tag: bytes) -> List[int]:
    if len(payload) % 8:
        raise CorruptSnapshot(f"section {tag.decode()} is not a whole number of int64 values")
    return np.frombuffer(payload, dtype="<i8").tolist()


def _encode_addresses(addresses: List[str]) -> bytes:
    buf = bytearray(encode_varint(len(addresses)))
    for address in addresses:
        raw = address.encode("utf-8")
        buf += encode_varint(len(raw))
        buf += raw
    return bytes(buf)


def _encode_outpoints(engine: ClusterEngine) -> bytes:
    buf = bytearray(encode_varint(len(engine.index)))
    for outpoint, entry in engine.index.entries.items():
        buf += outpoint.txid
        buf += pack_u32(outpoint.vout)
        buf += pack_u64(entry.value)
        buf.append(int(entry.script_class.kind))
        buf += encode_varint(entry.script_class.m)
        buf += encode_varint(entry.script_class.n)
        buf.append(1 if entry.spent else 0)
        buf += pack_u64(entry.creating_ordinal)
        buf += encode_varint(len(entry.addresses))
        for a in entry.addresses:
            buf += encode_varint(a)
    return bytes(buf)


def _encode_events(events: List[MergeEvent]) -> bytes:
    buf = bytearray(encode_varint(len(events)))
    for event in events:
        buf += pack_u64(event.tx_ordinal)
        buf += event.txid
        buf += encode_varint(len(event.component_sizes))
        for size, rep in zip(event.component_sizes, event.representatives):
            buf += encode_varint(size)
            buf += encode_varint(rep)
        for increase in event.increases:
            buf += encode_varint(increase)
    return bytes(buf)


def snapshot_bytes(engine: ClusterEngine) -> bytes:
    """Serialize a quiescent engine. Identical histories give identical bytes."""
    log = engine.log
    meta = {
        "strict": engine.strict,
        "skipped_inputs": engine.skipped_inputs,
        "num_clusters_ge2": engine.state.num_clusters_ge2,
        "transactions": len(log),
        "addresses": len(engine.addresses),
    }
    sections: Dict[bytes, bytes] = {
        b"META": json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8"),
        b"ADDR": _encode_addresses(engine.addresses),
        b"TXID": b"".join(log.txids),
        b"OUTP": _encode_outpoints(engine),
        b"MERG": _encode_events(log.merge_events),
    }
    for tag, (owner, attribute) in _INT_ARRAYS.items():
        sections[tag] = _pack_ints(getattr(_owner(engine, owner), attribute))
    for tag, attribute in _FLAG_ARRAYS.items():
        sections[tag] = bytes(getattr(log, attribute))

    buf = bytearray(MAGIC + pack_u16(VERSION))
    for tag in SECTION_ORDER:
        payload = sections[tag]
        buf += tag
        buf += pack_u64(len(payload))
        buf += payload
    buf += pack_u32(zlib.crc32(buf))
    return bytes(buf)


def _read_sections(data: bytes) -> Dict[bytes, bytes]:
    if len(data) < 10 or data[:4] != MAGIC:
        raise CorruptSnapshot("not a snapshot file (bad magic)")
    version = int.from_bytes(data[4:6], "little")
    if version != VERSION:
        raise VersionMismatch(f"snapshot version {version}, expected {VERSION}")
    body, trailer = data[:-4], data[-4:]
    if zlib.crc32(body) != int.from_bytes(trailer, "little"):
        raise CorruptSnapshot("checksum mismatch")

    reader = ByteReader(io.BytesIO(body[6:]))
    sections: Dict[bytes, bytes] = {}
    try:
        while not reader.at_eof():
            tag = reader.read_exact(4)
            sections[tag] = reader.read_exact(reader.u64())
    except ShortRead as e:
        raise CorruptSnapshot("truncated section") from e

    missing = [tag.decode() for tag in SECTION_ORDER if tag not in sections]
    if missing:
        raise CorruptSnapshot(f"missing section(s): {', '.join(missing)}")
    return sections


def _decode_addresses(reader: ByteReader) -> List[str]:
    return [reader.var_bytes().decode("utf-8") for _ in range(reader.varint())]


def _decode_outpoints(reader: ByteReader, engine: ClusterEngine) -> None:
    entries = engine.index.entries
    for _ in range(reader.varint()):
        outpoint = OutPoint(reader.read_exact(32), reader.u32())
        value = reader.u64()
        kind, m, n = ScriptKind(reader.u8()), reader.varint(), reader.varint()
        spent = reader.u8() == 1
        creating_ordinal = reader.u64()
        addresses = tuple(reader.varint() for _ in range(reader.varint()))
        entries[outpoint] = OutpointEntry(addresses, value, ScriptClass(kind, m, n), creating_ordinal, spent)


def _decode_events(reader: ByteReader) -> List[MergeEvent]:
    events = []
    for _ in range(reader.varint()):
        ordinal = reader.u64()
        txid = reader.read_exact(32)
        k = reader.varint()
        pairs = [(reader.varint(), reader.varint()) for _ in range(k)]
        increases = tuple(reader.varint() for _ in range(k - 1))
        events.append(MergeEvent(
            tx_ordinal=ordinal,
            txid=txid,
            component_sizes=tuple(size for size, _ in pairs),
            increases=increases,
            representatives=tuple(rep for _, rep in pairs),
        ))
    return events


def engine_from_bytes(data: bytes) -> ClusterEngine:
    sections = _read_sections(data)
    try:
        meta = json.loads(sections[b"META"].decode("utf-8"))
        engine = ClusterEngine(strict=bool(meta["strict"]))
        engine.skipped_inputs = int(meta["skipped_inputs"])
        engine.state.num_clusters_ge2 = int(meta["num_clusters_ge2"])

        engine.addresses = _decode_addresses(ByteReader(io.BytesIO(sections[b"ADDR"])))
        engine.address_ids = {address: dense for dense, address in enumerate(engine.addresses)}

        for tag, (owner, attribute) in _INT_ARRAYS.items():
            setattr(_owner(engine, owner), attribute, _unpack_ints(sections[tag], tag))
        log = engine.log
        for tag, attribute in _FLAG_ARRAYS.items():
            setattr(log, attribute, bytearray(sections[tag]))

        txids = sections[b"TXID"]
        if len(txids) % 32:
            raise CorruptSnapshot("txid section is not a whole number of txids")
        log.txids = [txids[i:i + 32] for i in range(0, len(txids), 32)]

        _decode_outpoints(ByteReader(io.BytesIO(sections[b"OUTP"])), engine)
        log.merge_events = _decode_events(ByteReader(io.BytesIO(sections[b"MERG"])))
    except (ShortRead, ValueError, KeyError, UnicodeDecodeError, ValidationError) as e:
        raise CorruptSnapshot(f"malformed snapshot payload: {e}") from e

    _check_consistency(engine, meta)
    return engine


def _check_consistency(engine: ClusterEngine, meta: dict) -> None:
    log, state = engine.log, engine.state
    n, a = int(meta["transactions"]), int(meta["addresses"])
    per_tx = [log.txids, log.timestamps, log.is_coinbase, log.is_nontrivial, log.caused_merge,
              log.new_address_count, log.addressable_output_count, log.input_count, log.addressed_input_count]
    if any(len(column) != n for column in per_tx) or len(log.spend_offsets) != n + 1 or len(log.output_offsets) != n + 1:
        raise CorruptSnapshot("per-transaction log columns disagree on the transaction count")
    per_address = [engine.addresses, state.parent, state.size, state.minimum, engine.current_balance, engine.max_balance]
    if any(len(column) != a for column in per_address):
        raise CorruptSnapshot("per-address columns disagree on the address count")
    if any(not 0 <= p < a for p in state.parent):
        raise CorruptSnapshot("parent array points outside the address table")


def snapshot(engine: ClusterEngine, path: Union[str, Path]) -> Path:
    """Write the engine to path atomically."""
    path = Path(path)
    data = snapshot_bytes(engine)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.info(f"Snapshot of {len(engine.log)} transactions written to {path} ({len(data)} bytes)")
    return path


def restore(path: Union[str, Path]) -> ClusterEngine:
    path = Path(path)
    engine = engine_from_bytes(path.read_bytes())
    logger.info(f"Restored engine at {len(engine.log)} transactions from {path}")
    return engine
