"""
Anomaly flags over the merge-event log: transactions causing the largest
single increases, and clusters formed by merging two or more large clusters.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Dict, List, Optional, Tuple

import pandas as pd

from app.core.exceptions import EmptyRange, InvalidParams
from app.core.models import MergeEvent

if TYPE_CHECKING:
    from app.services.cluster_engine import ClusterEngine

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FlaggedTransaction:
    ordinal: int
    txid: bytes
    max_increase: int
    component_sizes: Tuple[int, ...]
    spending_cluster: int


@dataclass(frozen=True)
class FlaggedCluster:
    representative: int
    size: int
    events: Tuple[MergeEvent, ...]


def _ordinals_in_range(
    engine: "ClusterEngine",
    ordinal_range: Optional[Tuple[int, int]],
    time_range: Optional[Tuple[int, int]],
) -> List[int]:
    """Ordinals selected by half-open [start, end) ordinal and time ranges."""
    timestamps = engine.log.timestamps
    lo, hi = ordinal_range if ordinal_range else (0, len(timestamps))
    ordinals = range(max(lo, 0), min(hi, len(timestamps)))
    if time_range:
        t0, t1 = time_range
        return [i for i in ordinals if t0 <= timestamps[i] < t1]
    return list(ordinals)


def flag_anomalous_transactions(
    engine: "ClusterEngine",
    fraction: float = 0.0001,
    ordinal_range: Optional[Tuple[int, int]] = None,
    time_range: Optional[Tuple[int, int]] = None,
) -> List[FlaggedTransaction]:
    """Top ceil(fraction * transactions-in-range) merging transactions by largest increase.

    Ties go to the smaller ordinal. Each result names the cluster its inputs
    belong to now.
    """
    if not 0 < fraction <= 1:
        raise InvalidParams(f"fraction must lie in (0, 1], got {fraction}")
    ordinals = _ordinals_in_range(engine, ordinal_range, time_range)
    if not ordinals:
        raise EmptyRange("no transactions in the requested range")

    selected = set(ordinals)
    candidates = [e for e in engine.log.merge_events if e.tx_ordinal in selected]
    candidates.sort(key=lambda e: (-e.max_increase, e.tx_ordinal))

    limit = math.ceil(Fraction(fraction).limit_denominator(10**12) * len(ordinals))
    flagged = []
    for event in candidates[:limit]:
        first_spent = engine.log.spent_addresses_of(event.tx_ordinal)[0]
        flagged.append(FlaggedTransaction(
            ordinal=event.tx_ordinal,
            txid=event.txid,
            max_increase=event.max_increase,
            component_sizes=event.component_sizes,
            spending_cluster=engine.find(first_spent),
        ))
    logger.info(f"Flagged {len(flagged)} of {len(candidates)} merging transactions among {len(ordinals)} in range")
    return flagged


def flag_anomalous_clusters(engine: "ClusterEngine", large_threshold: int) -> List[FlaggedCluster]:
    """Clusters with at least one merge of two or more components of size >= large_threshold."""
    if large_threshold < 2:
        raise InvalidParams(f"large threshold must be >= 2, got {large_threshold}")

    grouped: Dict[int, List[MergeEvent]] = {}
    for event in engine.log.merge_events:
        if sum(1 for size in event.component_sizes if size >= large_threshold) >= 2:
            grouped.setdefault(engine.find(event.representatives[0]), []).append(event)

    return [
        FlaggedCluster(rep, engine.cluster_size(rep), tuple(events))
        for rep, events in sorted(grouped.items())
    ]


def flagged_transactions_frame(flagged: List[FlaggedTransaction]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "ordinal": f.ordinal,
                "txid": f.txid.hex(),
                "max_increase": f.max_increase,
                "component_sizes": " ".join(str(s) for s in f.component_sizes),
                "spending_cluster": f.spending_cluster,
            }
            for f in flagged
        ],
        columns=["ordinal", "txid", "max_increase", "component_sizes", "spending_cluster"],
    )


def flagged_clusters_frame(flagged: List[FlaggedCluster]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "representative": f.representative,
                "size": f.size,
                "event_ordinal": e.tx_ordinal,
                "txid": e.txid.hex(),
                "component_sizes": " ".join(str(s) for s in e.component_sizes),
            }
            for f in flagged
            for e in f.events
        ],
        columns=["representative", "size", "event_ordinal", "txid", "component_sizes"],
    )
