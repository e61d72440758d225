"""
Tests for engine snapshot and resume.
"""

import random

import pytest

from conftest import run_engine
from app.core.exceptions import CorruptSnapshot, VersionMismatch
from app.services.analytics import WindowSpec, merge_increase_quantiles, ratio_series, window_counts
from app.services.cluster_engine import ClusterEngine
from app.services.snapshot import VERSION, engine_from_bytes, restore, snapshot, snapshot_bytes


def _artifacts(engine: ClusterEngine) -> bytes:
    windowing = WindowSpec.by_count(200)
    parts = [
        window_counts(engine.log, windowing).to_csv(index=False),
        ratio_series(engine.log, windowing).to_csv(index=False),
        merge_increase_quantiles(engine.log.merge_events, 200, [2, 10, 100]).to_csv(index=False),
    ]
    return "".join(parts).encode()


def test_empty_snapshot_restores_empty_engine(tmp_path):
    path = snapshot(ClusterEngine(), tmp_path / "empty.acsn")
    engine = restore(path)
    assert engine.tx_count == 0
    assert engine.addresses == []
    assert engine.log.spend_offsets == [0]


def test_snapshot_is_deterministic(reuse_stream):
    assert snapshot_bytes(run_engine(reuse_stream)) == snapshot_bytes(run_engine(reuse_stream))


def test_restore_round_trip(reuse_engine):
    data = snapshot_bytes(reuse_engine)
    assert snapshot_bytes(engine_from_bytes(data)) == data


@pytest.fixture(scope="module")
def one_shot(reuse_stream):
    # fresh engine: lookups compress paths, which shows up in the parent array
    return run_engine(reuse_stream)


@pytest.mark.parametrize("split", [0, 1500] + random.Random(3).sample(range(1, 3000), 8))
def test_resume_equals_one_shot(reuse_stream, one_shot, split):
    head = run_engine(reuse_stream[:split])
    resumed = engine_from_bytes(snapshot_bytes(head))
    resumed.process_stream(reuse_stream[split:])
    assert snapshot_bytes(resumed) == snapshot_bytes(one_shot)
    assert _artifacts(resumed) == _artifacts(one_shot)


def test_version_mismatch(reuse_engine):
    data = bytearray(snapshot_bytes(reuse_engine))
    data[4:6] = (VERSION + 1).to_bytes(2, "little")
    with pytest.raises(VersionMismatch):
        engine_from_bytes(bytes(data))


def test_corrupt_snapshot(reuse_engine):
    data = bytearray(snapshot_bytes(reuse_engine))
    data[len(data) // 2] ^= 0xFF
    with pytest.raises(CorruptSnapshot):
        engine_from_bytes(bytes(data))
    with pytest.raises(CorruptSnapshot):
        engine_from_bytes(b"NOPE" + bytes(20))
    with pytest.raises(CorruptSnapshot):
        engine_from_bytes(bytes(data[:40]))
