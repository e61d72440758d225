"""
Clustering throughput on a pre-generated synthetic stream.

Skipped unless RUN_BENCHMARKS=1. BENCHMARK_TRANSACTIONS sets the stream length
(default 1,000,000) and BENCHMARK_MIN_TPS the rate to hold (default 100,000).
"""

import os
import time

import pytest

from conftest import synth_records
from app.services.cluster_engine import ClusterEngine

pytestmark = [
    pytest.mark.benchmark,
    pytest.mark.skipif(os.environ.get("RUN_BENCHMARKS") != "1", reason="set RUN_BENCHMARKS=1 to measure throughput"),
]


def test_clustering_throughput():
    n = int(os.environ.get("BENCHMARK_TRANSACTIONS", "1000000"))
    floor = float(os.environ.get("BENCHMARK_MIN_TPS", "100000"))
    records = synth_records(seed=1, num_transactions=n, p_reuse=0.1)

    engine = ClusterEngine()
    started = time.perf_counter()
    engine.process_stream(records)
    elapsed = time.perf_counter() - started

    rate = n / elapsed
    print(f"\n{n} transactions clustered in {elapsed:.2f}s ({rate:,.0f} tx/s)")
    assert engine.tx_count == n
    assert rate >= floor
