"""
Tests for the text and binary stream codecs.
"""

import io
import random

import pytest

from conftest import StreamBuilder, make_txid, multisig, synth_records
from app.codec import encode_binary, encode_text, parse_binary, parse_text, write_binary
from app.codec.binary_codec import HEADER_SIZE, encode_header
from app.core.exceptions import (
    BadMagic,
    BadVersion,
    CodecError,
    DuplicateTxid,
    EmptyOutputs,
    ScriptArityViolation,
    TextSyntaxError,
    TruncatedRecord,
)
from app.core.models import COINBASE_OUTPOINT, OP_RETURN, P2PKH, TxOutputDecl, TxRecord

TXID = "ab" * 32


def _line(obj: str) -> io.BytesIO:
    return io.BytesIO(obj.encode("utf-8"))


@pytest.fixture(scope="module")
def mixed_stream():
    return synth_records(seed=5, num_transactions=400, p_reuse=0.2, multisig_fraction=0.1, op_return_fraction=0.1)


def test_text_round_trip_is_byte_exact(mixed_stream):
    encoded = encode_text(mixed_stream)
    parsed = list(parse_text(io.BytesIO(encoded)))
    assert parsed == mixed_stream
    assert encode_text(parsed) == encoded


def test_text_record_layout():
    builder = StreamBuilder(start_time=1_400_000_000)
    builder.coinbase(("1abc", 50), TxOutputDecl(0, OP_RETURN, ()))
    line = encode_text(builder.records).decode()
    assert line.startswith('{"txid":"')
    assert '"time":1400000000,"in":[{"txid":"' + "00" * 32 + '","vout":4294967295}]' in line
    assert line.endswith('"out":[{"sat":50,"cls":"p2pkh","addr":["1abc"]},{"sat":0,"cls":"op_return","addr":[]}]}\n')


def test_text_skips_blank_lines_and_counts_them():
    data = "\n" + f'{{"txid":"{TXID}","time":1,"in":[{{"txid":"{"00" * 32}","vout":4294967295}}],"out":[]}}' + "\n"
    with pytest.raises(EmptyOutputs) as info:
        list(parse_text(_line(data)))
    assert info.value.line == 2


def test_text_bad_json_reports_line():
    with pytest.raises(TextSyntaxError) as info:
        list(parse_text(_line('{"txid": \n')))
    assert info.value.line == 1


def test_text_missing_key_is_syntax_error():
    with pytest.raises(TextSyntaxError):
        list(parse_text(_line(f'{{"txid":"{TXID}","time":1,"in":[]}}\n')))


def test_text_unknown_class_is_syntax_error():
    data = f'{{"txid":"{TXID}","time":1,"in":[{{"txid":"{"00" * 32}","vout":4294967295}}],"out":[{{"sat":1,"cls":"p2tr","addr":["a"]}}]}}\n'
    with pytest.raises(TextSyntaxError):
        list(parse_text(_line(data)))


def test_text_arity_violation():
    data = f'{{"txid":"{TXID}","time":1,"in":[{{"txid":"{"00" * 32}","vout":4294967295}}],"out":[{{"sat":1,"cls":"ms(1,2)","addr":["a"]}}]}}\n'
    with pytest.raises(ScriptArityViolation):
        list(parse_text(_line(data)))


def test_text_duplicate_txid():
    builder = StreamBuilder()
    builder.coinbase(("a", 1))
    data = encode_text(builder.records) * 2
    with pytest.raises(DuplicateTxid) as info:
        list(parse_text(io.BytesIO(data)))
    assert info.value.line == 2


def test_text_start_ordinal():
    builder = StreamBuilder()
    builder.coinbase(("a", 1))
    builder.coinbase(("b", 1))
    parsed = list(parse_text(io.BytesIO(encode_text(builder.records)), start_ordinal=10))
    assert [tx.ordinal for tx in parsed] == [10, 11]


def test_binary_round_trip_is_byte_exact(mixed_stream):
    encoded = encode_binary(mixed_stream)
    parsed = list(parse_binary(io.BytesIO(encoded)))
    assert parsed == mixed_stream
    assert encode_binary(parsed) == encoded


@pytest.mark.parametrize("group", range(50))
def test_formats_agree_over_seeded_streams(group):
    for seed in range(group * 20, (group + 1) * 20):
        rng = random.Random(seed)
        records = synth_records(
            seed=seed,
            num_transactions=rng.randint(0, 30),
            p_reuse=rng.choice([0.0, 0.2, 0.7]),
            mean_inputs=rng.uniform(1.0, 3.0),
            multisig_fraction=rng.choice([0.0, 0.3]),
            op_return_fraction=rng.choice([0.0, 0.3]),
            coinbase_interval=rng.randint(1, 8),
        )
        binary, text = encode_binary(records), encode_text(records)
        from_binary = list(parse_binary(io.BytesIO(binary)))
        from_text = list(parse_text(io.BytesIO(text)))
        assert from_binary == records, f"seed {seed}"
        assert from_text == from_binary, f"seed {seed}"
        assert encode_binary(from_text) == binary
        assert encode_text(from_binary) == text


def test_binary_empty_stream():
    encoded = encode_binary([])
    assert len(encoded) == HEADER_SIZE == 14
    assert encoded[:4] == b"ACLS"
    assert list(parse_binary(io.BytesIO(encoded))) == []


def test_binary_unknown_count_reads_to_eof(mixed_stream):
    buf = io.BytesIO()
    write_binary(buf, mixed_stream[:50])
    assert buf.getvalue()[6:14] == bytes(8)
    assert list(parse_binary(io.BytesIO(buf.getvalue()))) == mixed_stream[:50]


def test_binary_bad_magic_and_version():
    with pytest.raises(BadMagic):
        list(parse_binary(io.BytesIO(b"XXXX" + bytes(10))))
    with pytest.raises(BadVersion):
        list(parse_binary(io.BytesIO(b"ACLS" + (2).to_bytes(2, "little") + bytes(8))))


def test_binary_truncated_record_reports_ordinal(mixed_stream):
    encoded = encode_binary(mixed_stream[:3])
    with pytest.raises(TruncatedRecord) as info:
        list(parse_binary(io.BytesIO(encoded[:-5])))
    assert info.value.ordinal == 2


def test_binary_declared_count_larger_than_records(mixed_stream):
    encoded = encode_header(5) + encode_binary(mixed_stream[:2])[HEADER_SIZE:]
    with pytest.raises(TruncatedRecord):
        list(parse_binary(io.BytesIO(encoded)))


def test_binary_rejects_timestamp_beyond_u32():
    tx = TxRecord(make_txid("late"), 2**32, 0, (COINBASE_OUTPOINT,), (TxOutputDecl(1, P2PKH, ("a",)),))
    with pytest.raises(CodecError):
        encode_binary([tx])


def test_binary_multisig_parameters_survive():
    builder = StreamBuilder()
    builder.coinbase(multisig(2, 3, 10, "k1", "k2", "k3"))
    parsed = list(parse_binary(io.BytesIO(encode_binary(builder.records))))
    assert parsed[0].outputs[0].script_class.to_text() == "ms(2,3)"
