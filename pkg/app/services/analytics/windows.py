"""
Windowed counting series: monthly or per-N-transaction counts of transactions,
new addresses and newly formed clusters, and the ratio series with their
upper bounds.
"""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal, Union

import numpy as np
import pandas as pd

if TYPE_CHECKING:
    from app.services.cluster_engine import EngineLog

logger = logging.getLogger(__name__)

WINDOW_COUNT_COLUMNS = [
    "window_start",
    "window_end",
    "transactions",
    "new_addresses",
    "clusters_reaching_size_2",
    "clusters_ge2_end",
]

RATIO_COLUMNS = [
    "window_start",
    "window_end",
    "transactions",
    "new_addresses_per_tx",
    "addressable_outputs_per_tx",
    "merging_txs_per_tx",
    "nontrivial_txs_per_tx",
    "reuse_gap",
    "merge_gap",
]


@dataclass(frozen=True)
class WindowSpec:
    mode: Literal["month", "count"] = "month"
    size: int = 1

    def __post_init__(self):
        if self.mode == "count" and self.size < 1:
            raise ValueError("transaction-count windows need N >= 1")

    @classmethod
    def monthly(cls) -> "WindowSpec":
        return cls("month")

    @classmethod
    def by_count(cls, n: int) -> "WindowSpec":
        return cls("count", n)

    @classmethod
    def parse(cls, value: Union[str, int]) -> "WindowSpec":
        if value == "month":
            return cls.monthly()
        return cls.by_count(int(value))


def _month_index(timestamps: np.ndarray) -> np.ndarray:
    dates = pd.to_datetime(timestamps, unit="s", utc=True)
    return np.asarray(dates.year * 12 + dates.month - 1, dtype=np.int64)


def _window_keys(timestamps: np.ndarray, ordinals: np.ndarray, windowing: WindowSpec) -> np.ndarray:
    if windowing.mode == "month":
        return _month_index(timestamps)
    return ordinals // windowing.size


def _bounds(keys: np.ndarray, windowing: WindowSpec, tx_count: int):
    if windowing.mode == "month":
        start = [f"{k // 12:04d}-{k % 12 + 1:02d}-01" for k in keys]
        end = [f"{(k + 1) // 12:04d}-{(k + 1) % 12 + 1:02d}-01" for k in keys]
        return start, end
    return [int(k * windowing.size) for k in keys], [int(min((k + 1) * windowing.size, tx_count)) for k in keys]


def _per_tx_frame(log: "EngineLog", windowing: WindowSpec) -> pd.DataFrame:
    n = len(log)
    timestamps = np.asarray(log.timestamps, dtype=np.int64)
    frame = pd.DataFrame({
        "window": _window_keys(timestamps, np.arange(n, dtype=np.int64), windowing),
        "transactions": np.ones(n, dtype=np.int64),
        "new_addresses": np.asarray(log.new_address_count, dtype=np.int64),
        "addressable_outputs": np.asarray(log.addressable_output_count, dtype=np.int64),
        "merging_txs": np.frombuffer(bytes(log.caused_merge), dtype=np.uint8).astype(np.int64),
        "nontrivial_txs": np.frombuffer(bytes(log.is_nontrivial), dtype=np.uint8).astype(np.int64),
    })
    return frame


def window_totals(log: "EngineLog", windowing: WindowSpec) -> pd.DataFrame:
    """Integer per-window sums of every per-transaction counter, indexed by window key."""
    if len(log) == 0:
        return pd.DataFrame(columns=["transactions", "new_addresses", "addressable_outputs", "merging_txs", "nontrivial_txs"])
    return _per_tx_frame(log, windowing).groupby("window", sort=True).sum()


def window_counts(log: "EngineLog", windowing: WindowSpec) -> pd.DataFrame:
    """Transactions, new addresses and clusters newly reaching size 2 per window.

    clusters_ge2_end is the running count of clusters with at least two
    addresses after the window, so both readings of the cluster count are available.
    """
    if len(log) == 0:
        return pd.DataFrame(columns=WINDOW_COUNT_COLUMNS)

    totals = window_totals(log, windowing)
    timestamps = np.asarray(log.timestamps, dtype=np.int64)

    reach2 = np.asarray(log.reach2_ordinals, dtype=np.int64)
    reach2_keys = _window_keys(timestamps[reach2], reach2, windowing) if len(reach2) else np.empty(0, dtype=np.int64)
    reach2_counts = pd.Series(reach2_keys, dtype=np.int64).value_counts()

    # each merge changes the >=2 count by 1 - (number of united clusters already >= 2)
    events = log.merge_events
    event_ordinals = np.asarray([e.tx_ordinal for e in events], dtype=np.int64)
    deltas = np.asarray([1 - sum(1 for s in e.component_sizes if s >= 2) for e in events], dtype=np.int64)
    event_keys = _window_keys(timestamps[event_ordinals], event_ordinals, windowing) if len(events) else np.empty(0, dtype=np.int64)
    delta_sums = pd.Series(deltas, index=event_keys, dtype=np.int64).groupby(level=0).sum()

    keys = totals.index.to_numpy()
    start, end = _bounds(keys, windowing, len(log))
    frame = pd.DataFrame({
        "window_start": start,
        "window_end": end,
        "transactions": totals["transactions"].to_numpy(),
        "new_addresses": totals["new_addresses"].to_numpy(),
        "clusters_reaching_size_2": reach2_counts.reindex(keys, fill_value=0).to_numpy(dtype=np.int64),
        "clusters_ge2_end": delta_sums.reindex(keys, fill_value=0).cumsum().to_numpy(dtype=np.int64),
    })
    return frame


def ratio_series(log: "EngineLog", windowing: WindowSpec) -> pd.DataFrame:
    """Per-window ratios with their upper bounds and the gap measures.

    new_addresses_per_tx <= addressable_outputs_per_tx and
    merging_txs_per_tx <= nontrivial_txs_per_tx hold in every window.
    """
    if len(log) == 0:
        return pd.DataFrame(columns=RATIO_COLUMNS)

    totals = window_totals(log, windowing)
    totals = totals[totals["transactions"] > 0]
    tx = totals["transactions"].astype(float)
    keys = totals.index.to_numpy()
    start, end = _bounds(keys, windowing, len(log))

    return pd.DataFrame({
        "window_start": start,
        "window_end": end,
        "transactions": totals["transactions"].to_numpy(),
        "new_addresses_per_tx": (totals["new_addresses"] / tx).to_numpy(),
        "addressable_outputs_per_tx": (totals["addressable_outputs"] / tx).to_numpy(),
        "merging_txs_per_tx": (totals["merging_txs"] / tx).to_numpy(),
        "nontrivial_txs_per_tx": (totals["nontrivial_txs"] / tx).to_numpy(),
        "reuse_gap": ((totals["addressable_outputs"] - totals["new_addresses"]) / tx).to_numpy(),
        "merge_gap": ((totals["nontrivial_txs"] - totals["merging_txs"]) / tx).to_numpy(),
    })
