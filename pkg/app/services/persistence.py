"""
Relational export of clustering results.

Writes cluster summaries, address memberships for clusters at or above a
minimum size, and the merge-event log, replacing any earlier export.
"""

import logging
from typing import TYPE_CHECKING, Dict, List, Optional

from sqlalchemy import delete, select
from sqlalchemy.orm import Session

from app.core.models import TagEntry
from app.database.models import Cluster, ClusterAddress, MergeEventRecord
from app.services.graphs.tags import cluster_tags

if TYPE_CHECKING:
    from app.services.cluster_engine import ClusterEngine

logger = logging.getLogger(__name__)


def persist_results(
    session: Session,
    engine: "ClusterEngine",
    tags: Optional[List[TagEntry]] = None,
    min_size: int = 2,
) -> Dict[str, int]:
    """Replace the stored results with the engine's current state; returns row counts."""
    resolved, _ = cluster_tags(engine, tags or [])
    sizes = engine.cluster_sizes()
    kept = {rep for rep, size in sizes.items() if size >= min_size}
    reps = engine.representatives()

    funded: Dict[int, int] = {}
    for dense, rep in enumerate(reps):
        if rep in kept and engine.current_balance[dense] > 0:
            funded[rep] = funded.get(rep, 0) + engine.current_balance[dense]

    try:
        session.execute(delete(ClusterAddress))
        session.execute(delete(Cluster))
        session.execute(delete(MergeEventRecord))

        for rep in sorted(kept):
            tag = resolved.get(rep)
            session.add(Cluster(
                representative=rep,
                size=sizes[rep],
                label=tag.label if tag else None,
                category=tag.category.value if tag else None,
                funded_balance_sat=funded.get(rep, 0),
            ))
        session.flush()

        memberships = 0
        for dense, rep in enumerate(reps):
            if rep not in kept:
                continue
            session.add(ClusterAddress(
                address=engine.addresses[dense],
                address_id=dense,
                representative=rep,
                current_sat=engine.current_balance[dense],
                max_sat=engine.max_balance[dense],
            ))
            memberships += 1

        for event in engine.log.merge_events:
            session.add(MergeEventRecord(
                tx_ordinal=event.tx_ordinal,
                txid=event.txid.hex(),
                component_sizes=list(event.component_sizes),
                max_increase=event.max_increase,
                resulting_size=event.resulting_size,
            ))
        session.commit()
    except Exception as e:
        session.rollback()
        logger.error(f"Error persisting clustering results: {e}")
        raise

    counts = {"clusters": len(kept), "addresses": memberships, "merge_events": len(engine.log.merge_events)}
    logger.info(f"Persisted {counts['clusters']} clusters, {counts['addresses']} addresses, {counts['merge_events']} merge events")
    return counts


def lookup_address(session: Session, external: str) -> Optional[Cluster]:
    """Cluster row for an address, or None when the address was not exported."""
    row = session.execute(select(ClusterAddress).where(ClusterAddress.address == external)).scalar_one_or_none()
    return None if row is None else row.cluster
