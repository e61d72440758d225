"""
Shared fixtures: hand-built streams, seeded synthetic streams and engines.
"""

import hashlib
import os
import sys
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pytest

# Add the project root to Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.codec.synthetic import SynthParams, generate_synthetic  # noqa: E402
from app.core.models import (  # noqa: E402
    COINBASE_OUTPOINT,
    P2PKH,
    OutPoint,
    ScriptClass,
    TxOutputDecl,
    TxRecord,
    validate,
)
from app.services.cluster_engine import ClusterEngine  # noqa: E402

Output = Union[Tuple[str, int], TxOutputDecl]


def make_txid(label: str) -> bytes:
    return hashlib.sha256(label.encode("utf-8")).digest()


class StreamBuilder:
    """Builds small validated streams; spends refer to outputs by (txid, vout)."""

    def __init__(self, start_time: int = 1_300_000_000, gap: int = 600):
        self.records: List[TxRecord] = []
        self.time = start_time
        self.gap = gap

    def _outputs(self, outputs: Sequence[Output]) -> Tuple[TxOutputDecl, ...]:
        decls = []
        for out in outputs:
            if isinstance(out, TxOutputDecl):
                decls.append(out)
            else:
                address, value = out
                decls.append(TxOutputDecl(value, P2PKH, (address,)))
        return tuple(decls)

    def _add(self, inputs, outputs, timestamp: Optional[int]) -> bytes:
        ordinal = len(self.records)
        txid = make_txid(f"tx-{ordinal}")
        if timestamp is None:
            timestamp = self.time
            self.time += self.gap
        self.records.append(validate(TxRecord(txid, timestamp, ordinal, tuple(inputs), self._outputs(outputs))))
        return txid

    def coinbase(self, *outputs: Output, timestamp: Optional[int] = None) -> bytes:
        return self._add((COINBASE_OUTPOINT,), outputs, timestamp)

    def spend(self, inputs: Sequence[Tuple[bytes, int]], *outputs: Output, timestamp: Optional[int] = None) -> bytes:
        return self._add([OutPoint(txid, vout) for txid, vout in inputs], outputs, timestamp)


def run_engine(records, strict: bool = True) -> ClusterEngine:
    engine = ClusterEngine(strict=strict)
    engine.process_stream(records)
    return engine


def synth_records(**overrides) -> List[TxRecord]:
    return list(generate_synthetic(SynthParams(**overrides)))


def multisig(m: int, n: int, value: int, *addresses: str) -> TxOutputDecl:
    return TxOutputDecl(value, ScriptClass.multisig(m, n), tuple(addresses))


def merge_example() -> Tuple[StreamBuilder, Dict[str, bytes]]:
    """Clusters of sizes 1, 1, 2 and 10 co-spent by the last transaction."""
    builder = StreamBuilder()
    names = ["s1", "s2", "p1", "p2"] + [f"b{i}" for i in range(1, 11)]
    cb = builder.coinbase(*[(name, 100) for name in names])
    pair = builder.spend([(cb, 2), (cb, 3)], ("p1", 200))
    big = builder.spend([(cb, vout) for vout in range(4, 14)], ("b1", 1000))
    final = builder.spend([(cb, 0), (cb, 1), (pair, 0), (big, 0)], ("z", 1200))
    return builder, {"coinbase": cb, "pair": pair, "big": big, "final": final}


@pytest.fixture
def builder() -> StreamBuilder:
    return StreamBuilder()


@pytest.fixture
def engine() -> ClusterEngine:
    return ClusterEngine()


@pytest.fixture(scope="session")
def reuse_stream() -> List[TxRecord]:
    """A 3000-transaction stream with address reuse and mixed output classes."""
    return synth_records(
        seed=11,
        num_transactions=3000,
        p_reuse=0.3,
        mean_inputs=2.0,
        multisig_fraction=0.05,
        op_return_fraction=0.05,
    )


@pytest.fixture(scope="session")
def reuse_engine(reuse_stream) -> ClusterEngine:
    return run_engine(reuse_stream)


def pytest_configure(config):
    config.addinivalue_line("markers", "benchmark: throughput measurements, skipped unless RUN_BENCHMARKS=1")
