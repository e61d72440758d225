"""
Address tag files and lifting tags to clusters.

A tag file is CSV with the header address,label,category. A cluster takes
the tag of any tagged member; members tagged differently leave it untagged
and produce a TagConflict warning.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Tuple, Union

import networkx as nx
import pandas as pd

from app.core.exceptions import MalformedTagFile
from app.core.models import TagCategory, TagEntry

if TYPE_CHECKING:
    from app.services.cluster_engine import ClusterEngine

logger = logging.getLogger(__name__)

TAG_COLUMNS = ["address", "label", "category"]


@dataclass(frozen=True)
class TagConflict:
    representative: int
    tags: Tuple[TagEntry, ...]

    def __str__(self) -> str:
        labels = ", ".join(f"{t.address}={t.label}/{t.category.value}" for t in self.tags)
        return f"cluster {self.representative} has conflicting tags: {labels}"


def load_tags(path: Union[str, Path]) -> List[TagEntry]:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise MalformedTagFile(f"{path}: {e}") from e

    if list(frame.columns) != TAG_COLUMNS:
        raise MalformedTagFile(f"{path}: expected header {','.join(TAG_COLUMNS)}, got {','.join(frame.columns)}")

    duplicated = frame["address"][frame["address"].duplicated()]
    if not duplicated.empty:
        raise MalformedTagFile(f"{path}: address {duplicated.iloc[0]!r} is tagged more than once")

    entries = []
    for row, (address, label, category) in enumerate(frame.itertuples(index=False, name=None), start=2):
        if not address:
            raise MalformedTagFile(f"{path}:{row}: empty address")
        try:
            entries.append(TagEntry(address, label, TagCategory(category)))
        except ValueError as e:
            raise MalformedTagFile(f"{path}:{row}: unknown category {category!r}") from e
    logger.info(f"Loaded {len(entries)} tags from {path}")
    return entries


def cluster_tags(engine: "ClusterEngine", tags: List[TagEntry]) -> Tuple[Dict[int, TagEntry], List[TagConflict]]:
    """Resolve tags to cluster representatives; conflicting clusters stay untagged."""
    by_cluster: Dict[int, List[TagEntry]] = {}
    unknown = 0
    for entry in tags:
        if entry.address not in engine.address_ids:
            unknown += 1
            continue
        by_cluster.setdefault(engine.find(entry.address), []).append(entry)
    if unknown:
        logger.debug(f"{unknown} tagged address(es) never appear in the stream")

    resolved: Dict[int, TagEntry] = {}
    conflicts: List[TagConflict] = []
    for rep in sorted(by_cluster):
        entries = by_cluster[rep]
        if len({(e.label, e.category) for e in entries}) == 1:
            resolved[rep] = entries[0]
        else:
            conflict = TagConflict(rep, tuple(sorted(entries, key=lambda e: e.address)))
            logger.warning(str(conflict))
            conflicts.append(conflict)
    return resolved, conflicts


def apply_tags(graph: nx.DiGraph, engine: "ClusterEngine", tags: List[TagEntry]) -> List[TagConflict]:
    """Label the cluster vertices of a flow graph in place."""
    resolved, conflicts = cluster_tags(engine, tags)
    for _, data in graph.nodes(data=True):
        entry = resolved.get(data.get("representative"))
        if entry is not None:
            data["label"] = entry.label
            data["category"] = entry.category.value
    return conflicts
