"""
Tests for the threaded parser-to-engine pipeline.
"""

import io
import threading

import pytest

from conftest import run_engine, synth_records
from app.codec import encode_text, parse_text
from app.core.exceptions import TextSyntaxError
from app.services.cluster_engine import ClusterEngine
from app.services.pipeline import iter_pipelined
from app.services.snapshot import snapshot_bytes


def test_order_is_preserved():
    assert list(iter_pipelined(range(5000), queue_size=7)) == list(range(5000))


def test_empty_source():
    assert list(iter_pipelined([])) == []


def test_parser_error_surfaces_after_good_records():
    def source():
        yield 1
        yield 2
        raise ValueError("bad record")

    seen = []
    with pytest.raises(ValueError, match="bad record"):
        for item in iter_pipelined(source(), queue_size=1):
            seen.append(item)
    assert seen == [1, 2]


def test_early_close_stops_producer():
    produced = []

    def source():
        for i in range(10**6):
            produced.append(i)
            yield i

    stream = iter_pipelined(source(), queue_size=4)
    assert next(stream) == 0
    stream.close()
    assert not any(t.name == "stream-parser" and t.is_alive() for t in threading.enumerate())
    assert len(produced) < 100


def test_invalid_queue_size():
    with pytest.raises(ValueError):
        list(iter_pipelined([1], queue_size=0))


def test_pipelined_engine_matches_direct():
    records = synth_records(seed=13, num_transactions=1000, p_reuse=0.3)
    engine = ClusterEngine()
    engine.process_stream(iter_pipelined(parse_text(io.BytesIO(encode_text(records)))))
    assert snapshot_bytes(engine) == snapshot_bytes(run_engine(records))


def test_pipelined_parse_error_keeps_processed_prefix():
    records = synth_records(seed=14, num_transactions=50)
    data = encode_text(records[:20]) + b"{not json\n" + encode_text(records[20:])
    engine = ClusterEngine()
    with pytest.raises(TextSyntaxError) as info:
        engine.process_stream(iter_pipelined(parse_text(io.BytesIO(data))))
    assert info.value.line == 21
    assert engine.tx_count == 20
