"""
Cluster-size distributions: decade histogram, super-cluster shares and the
windowed quantiles of merge increases.
"""

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from app.core.exceptions import InvalidParams, InvalidQ
from app.core.models import MergeEvent

if TYPE_CHECKING:
    from app.services.cluster_engine import ClusterEngine, ClusterState

logger = logging.getLogger(__name__)

DEFAULT_Q_LIST = (100, 1000, 10000, 100000)


@dataclass
class SizeHistogram:
    """Counts of clusters with >= 2 addresses per decade bin [10^k, 10^(k+1))."""

    bins: Dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.bins.values())

    def count(self, low: int) -> int:
        """Count for the bin starting at low (a power of ten)."""
        return self.bins.get(len(str(low)) - 1, 0)

    def to_frame(self) -> pd.DataFrame:
        """Contiguous bins from [1, 10) up to the largest populated bin."""
        top = max(self.bins) if self.bins else -1
        ks = range(top + 1)
        return pd.DataFrame({
            "bin_low": [10 ** k for k in ks],
            "bin_high": [10 ** (k + 1) for k in ks],
            "clusters": [self.bins.get(k, 0) for k in ks],
        })


def size_histogram(state: "ClusterState") -> SizeHistogram:
    bins: Dict[int, int] = {}
    for root in state.roots():
        size = state.size[root]
        if size >= 2:
            k = len(str(size)) - 1
            bins[k] = bins.get(k, 0) + 1
    return SizeHistogram(dict(sorted(bins.items())))


@dataclass
class SuperclusterStats:
    min_size: int
    max_size: int
    count: int
    addresses: int
    total_addresses: int
    addresses_in_ge2: int
    outputs_attributed: int
    total_outputs: int
    inputs_attributed: int
    total_inputs: int
    representatives: List[int]
    excluded: List[Tuple[int, int]]

    @staticmethod
    def _share(part: int, whole: int) -> float:
        return part / whole if whole else 0.0

    @property
    def address_share_all(self) -> float:
        return self._share(self.addresses, self.total_addresses)

    @property
    def address_share_ge2(self) -> float:
        return self._share(self.addresses, self.addresses_in_ge2)

    @property
    def output_share(self) -> float:
        return self._share(self.outputs_attributed, self.total_outputs)

    @property
    def input_share(self) -> float:
        return self._share(self.inputs_attributed, self.total_inputs)

    def to_dict(self) -> dict:
        return {
            "min_size": self.min_size,
            "max_size": self.max_size,
            "count": self.count,
            "addresses": self.addresses,
            "address_share_all": self.address_share_all,
            "address_share_ge2": self.address_share_ge2,
            "outputs_attributed": self.outputs_attributed,
            "total_outputs": self.total_outputs,
            "output_share": self.output_share,
            "inputs_attributed": self.inputs_attributed,
            "total_inputs": self.total_inputs,
            "input_share": self.input_share,
            "excluded": [{"representative": rep, "size": size} for rep, size in self.excluded],
        }


def supercluster_stats(engine: "ClusterEngine", min_size: int = 1000, max_size: int = 10_000_000) -> SuperclusterStats:
    """Statistics for clusters with min_size <= size < max_size.

    address_share_ge2 is taken over the addresses of clusters with at least two
    addresses, leaving out the excluded clusters of size >= max_size.
    """
    if not 1 <= min_size < max_size:
        raise InvalidParams(f"need 1 <= min_size < max_size, got {min_size}, {max_size}")

    sizes = engine.cluster_sizes()
    selected = [rep for rep, size in sizes.items() if min_size <= size < max_size]
    excluded = [(rep, size) for rep, size in sizes.items() if size >= max_size]
    addresses = sum(sizes[rep] for rep in selected)
    in_ge2 = sum(size for size in sizes.values() if 2 <= size < max_size)

    reps = np.asarray(engine.representatives(), dtype=np.int64)
    is_super = np.isin(reps, np.asarray(selected, dtype=np.int64)) if len(reps) else np.zeros(0, dtype=bool)

    log = engine.log
    offsets = np.asarray(log.output_addr_offsets, dtype=np.int64)
    output_addrs = np.asarray(log.output_addr_ids, dtype=np.int64)
    total_outputs = len(offsets) - 1
    if len(output_addrs):
        owner = np.repeat(np.arange(total_outputs), np.diff(offsets))
        hits = np.bincount(owner, weights=is_super[output_addrs].astype(np.float64), minlength=total_outputs)
        outputs_attributed = int(np.count_nonzero(hits))
    else:
        outputs_attributed = 0

    input_counts = np.asarray(log.input_count, dtype=np.int64)
    # inputs spending address-less outputs belong to no cluster
    addressed_inputs = np.asarray(log.addressed_input_count, dtype=np.int64)
    spend_offsets = np.asarray(log.spend_offsets, dtype=np.int64)
    inputs_attributed = 0
    if len(input_counts):
        funded = np.flatnonzero(np.diff(spend_offsets) > 0)
        # all spent addresses of a transaction share one cluster after processing
        first_spent = np.asarray(log.spend_addresses, dtype=np.int64)[spend_offsets[funded]]
        inputs_attributed = int(addressed_inputs[funded][is_super[first_spent]].sum())

    stats = SuperclusterStats(
        min_size=min_size,
        max_size=max_size,
        count=len(selected),
        addresses=addresses,
        total_addresses=len(reps),
        addresses_in_ge2=in_ge2,
        outputs_attributed=outputs_attributed,
        total_outputs=total_outputs,
        inputs_attributed=inputs_attributed,
        total_inputs=int(input_counts.sum()) if len(input_counts) else 0,
        representatives=selected,
        excluded=excluded,
    )
    if excluded:
        logger.info(f"Excluded {len(excluded)} cluster(s) with >= {max_size} addresses from super-cluster stats")
    return stats


def nearest_rank(sorted_values: Sequence[int], q: int) -> int:
    """The (q-1)-th q-quantile of an ascending, non-empty sequence."""
    n = len(sorted_values)
    rank = -(-(q - 1) * n // q)
    return int(sorted_values[max(rank, 1) - 1])


def _check_q_list(q_list: Iterable[int]) -> List[int]:
    q_list = [int(q) for q in q_list]
    bad = [q for q in q_list if q < 2]
    if bad:
        raise InvalidQ(f"quantile q must be >= 2, got {bad}")
    return q_list


def merge_increase_quantiles(
    events: Sequence[MergeEvent],
    window_size: int = 250_000,
    q_list: Iterable[int] = DEFAULT_Q_LIST,
    total_transactions: Optional[int] = None,
) -> pd.DataFrame:
    """Nearest-rank quantiles of the pooled merge increases per window of window_size transactions.

    Windows without increases carry a missing value. total_transactions extends
    the table to cover every window of the stream, not only up to the last merge.
    """
    q_list = _check_q_list(q_list)
    if window_size < 1:
        raise InvalidParams(f"window size must be >= 1, got {window_size}")

    pools: Dict[int, List[int]] = {}
    for event in events:
        pools.setdefault(event.tx_ordinal // window_size, []).extend(event.increases)

    last = max(pools) if pools else -1
    if total_transactions:
        last = max(last, (total_transactions - 1) // window_size)

    rows = []
    for index in range(last + 1):
        pool = np.sort(np.asarray(pools.get(index, []), dtype=np.int64))
        row = {"window_index": index, "n": len(pool)}
        for q in q_list:
            row[f"q{q}"] = nearest_rank(pool, q) if len(pool) else pd.NA
        rows.append(row)

    columns = ["window_index", "n"] + [f"q{q}" for q in q_list]
    frame = pd.DataFrame(rows, columns=columns)
    for q in q_list:
        frame[f"q{q}"] = frame[f"q{q}"].astype("Int64")
    return frame
