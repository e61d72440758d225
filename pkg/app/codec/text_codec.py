"""
Line-delimited JSON transaction stream.

One record per line with a fixed key order:
    {"txid":..,"time":..,"in":[{"txid":..,"vout":..}],"out":[{"sat":..,"cls":..,"addr":[..]}]}
"""

import json
import logging
from typing import BinaryIO, Iterable, Iterator, Set

from app.core.exceptions import DuplicateTxid, TextSyntaxError, ValidationError
from app.core.models import OutPoint, ScriptClass, TxOutputDecl, TxRecord, validate

logger = logging.getLogger(__name__)

_RECORD_KEYS = {"txid", "time", "in", "out"}


def _parse_txid(value, line: int) -> bytes:
    if not isinstance(value, str) or len(value) != 64:
        raise TextSyntaxError(line, f"txid must be 64 hex characters, got {value!r}")
    try:
        return bytes.fromhex(value)
    except ValueError as e:
        raise TextSyntaxError(line, f"txid is not hex: {value!r}") from e


def _parse_uint(value, line: int, name: str) -> int:
    # bool is an int subclass; reject it explicitly
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise TextSyntaxError(line, f"{name} must be a non-negative integer, got {value!r}")
    return value


def _record_from_obj(obj, line: int, ordinal: int) -> TxRecord:
    if not isinstance(obj, dict) or set(obj) != _RECORD_KEYS:
        raise TextSyntaxError(line, "record must be an object with keys txid, time, in, out")
    if not isinstance(obj["in"], list) or not isinstance(obj["out"], list):
        raise TextSyntaxError(line, "'in' and 'out' must be arrays")

    inputs = []
    for item in obj["in"]:
        if not isinstance(item, dict) or set(item) != {"txid", "vout"}:
            raise TextSyntaxError(line, "input must be an object with keys txid, vout")
        inputs.append(OutPoint(_parse_txid(item["txid"], line), _parse_uint(item["vout"], line, "vout")))

    outputs = []
    for item in obj["out"]:
        if not isinstance(item, dict) or set(item) != {"sat", "cls", "addr"}:
            raise TextSyntaxError(line, "output must be an object with keys sat, cls, addr")
        addresses = item["addr"]
        if not isinstance(addresses, list) or not all(isinstance(a, str) for a in addresses):
            raise TextSyntaxError(line, "'addr' must be an array of strings")
        if not isinstance(item["cls"], str):
            raise TextSyntaxError(line, "'cls' must be a string")
        try:
            script_class = ScriptClass.from_text(item["cls"])
        except ValidationError as e:
            raise ValidationError(str(e), line=line) from e
        except ValueError as e:
            raise TextSyntaxError(line, str(e)) from e
        outputs.append(TxOutputDecl(_parse_uint(item["sat"], line, "sat"), script_class, tuple(addresses)))

    return TxRecord(
        txid=_parse_txid(obj["txid"], line),
        timestamp=_parse_uint(obj["time"], line, "time"),
        ordinal=ordinal,
        inputs=tuple(inputs),
        outputs=tuple(outputs),
    )


def parse_text(stream: BinaryIO, start_ordinal: int = 0) -> Iterator[TxRecord]:
    """Yield validated records in file order, assigning ordinals from start_ordinal."""
    seen: Set[bytes] = set()
    ordinal = start_ordinal
    for line_no, raw in enumerate(stream, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise TextSyntaxError(line_no, f"invalid JSON: {e}") from e

        tx = validate(_record_from_obj(obj, line_no, ordinal), line=line_no)
        if tx.txid in seen:
            raise DuplicateTxid(tx.txid, line=line_no)
        seen.add(tx.txid)
        ordinal += 1
        yield tx


def encode_record(tx: TxRecord) -> bytes:
    obj = {
        "txid": tx.txid.hex(),
        "time": tx.timestamp,
        "in": [{"txid": outpoint.txid.hex(), "vout": outpoint.vout} for outpoint in tx.inputs],
        "out": [
            {"sat": output.value, "cls": output.script_class.to_text(), "addr": list(output.addresses)}
            for output in tx.outputs
        ],
    }
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False).encode("utf-8") + b"\n"


def encode_text(records: Iterable[TxRecord]) -> bytes:
    return b"".join(encode_record(tx) for tx in records)


def write_text(stream: BinaryIO, records: Iterable[TxRecord]) -> int:
    """Stream records to a binary file object; returns the number written."""
    count = 0
    for tx in records:
        stream.write(encode_record(tx))
        count += 1
    return count
