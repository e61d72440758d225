"""
Artifact staging and the per-artifact writers used by the CLI subcommands.

Artifacts are written into a staging directory next to the output directory
and moved into place only when the whole command succeeds.
"""

import logging
import os
import shutil
import tempfile
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

from app.core.config import RunConfig
from app.core.exceptions import UnknownCluster
from app.services.analytics import (
    WindowSpec,
    flag_anomalous_clusters,
    flag_anomalous_transactions,
    flagged_clusters_frame,
    flagged_transactions_frame,
    merge_increase_quantiles,
    ratio_series,
    size_histogram,
    supercluster_stats,
    window_counts,
    write_csv,
    write_json,
)
from app.services.cluster_engine import ClusterEngine
from app.services.graphs import (
    apply_tags,
    bipartite_subgraph,
    export_dot,
    export_graphml,
    flow_accounting,
    flow_graph,
    load_tags,
    structure_summary,
)

logger = logging.getLogger(__name__)


class ArtifactStage:
    """Collects artifacts in a temporary directory and publishes them on commit."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.written: List[str] = []
        self._stage: Optional[Path] = None

    def __enter__(self) -> "ArtifactStage":
        parent = self.out_dir.resolve().parent
        parent.mkdir(parents=True, exist_ok=True)
        self._stage = Path(tempfile.mkdtemp(prefix=f".{self.out_dir.name}-", dir=parent))
        return self

    def path(self, name: str) -> Path:
        self.written.append(name)
        return self._stage / name

    def write_bytes(self, name: str, data: bytes) -> Path:
        path = self.path(name)
        path.write_bytes(data)
        return path

    def __exit__(self, exc_type, exc, tb):
        try:
            if exc_type is None:
                self.out_dir.mkdir(parents=True, exist_ok=True)
                for name in self.written:
                    os.replace(self._stage / name, self.out_dir / name)
                logger.info(f"Wrote {len(self.written)} artifact(s) to {self.out_dir}")
        finally:
            shutil.rmtree(self._stage, ignore_errors=True)
        return False


def cluster_table(engine: ClusterEngine) -> pd.DataFrame:
    sizes = engine.cluster_sizes()
    rows = [(rep, size) for rep, size in sizes.items() if size >= 2]
    return pd.DataFrame(rows, columns=["representative", "size"])


def summary(engine: ClusterEngine, config: RunConfig) -> Dict[str, int]:
    stats = supercluster_stats(engine, config.supercluster_min, config.supercluster_max)
    return {
        "transactions": engine.tx_count,
        "addresses": len(engine.addresses),
        "clusters": len(engine.cluster_sizes()),
        "clusters_ge2": engine.state.num_clusters_ge2,
        "merge_events": len(engine.log.merge_events),
        "superclusters": stats.count,
        "skipped_inputs": engine.skipped_inputs,
    }


def write_clusters(stage: ArtifactStage, engine: ClusterEngine, config: RunConfig) -> None:
    write_csv(cluster_table(engine), stage.path("clusters.csv"))
    write_json(summary(engine, config), stage.path("summary.json"))


def write_metrics(stage: ArtifactStage, engine: ClusterEngine, config: RunConfig) -> None:
    windowing = WindowSpec.parse(config.window)
    write_csv(window_counts(engine.log, windowing), stage.path("window_counts.csv"))
    write_csv(ratio_series(engine.log, windowing), stage.path("ratios.csv"))


def write_histogram(stage: ArtifactStage, engine: ClusterEngine, config: RunConfig) -> None:
    write_csv(size_histogram(engine.state).to_frame(), stage.path("size_histogram.csv"))


def write_quantiles(stage: ArtifactStage, engine: ClusterEngine, config: RunConfig) -> None:
    frame = merge_increase_quantiles(
        engine.log.merge_events, config.quantile_window, config.q_list, total_transactions=engine.tx_count
    )
    write_csv(frame, stage.path("merge_quantiles.csv"))


def write_superclusters(stage: ArtifactStage, engine: ClusterEngine, config: RunConfig) -> None:
    stats = supercluster_stats(engine, config.supercluster_min, config.supercluster_max)
    write_json(stats.to_dict(), stage.path("superclusters.json"))


def write_flags(stage: ArtifactStage, engine: ClusterEngine, config: RunConfig) -> None:
    flagged = flag_anomalous_transactions(engine, config.fraction, config.ordinal_range, config.time_range)
    write_csv(flagged_transactions_frame(flagged), stage.path("flagged_transactions.csv"))
    clusters = flag_anomalous_clusters(engine, config.large_threshold)
    write_csv(flagged_clusters_frame(clusters), stage.path("flagged_clusters.csv"))


def write_structure(stage: ArtifactStage, engine: ClusterEngine, config: RunConfig) -> None:
    rep = config.cluster if config.cluster is not None else _largest_cluster(engine)
    graph = bipartite_subgraph(engine, rep)
    stage.write_bytes(f"structure_{rep}.dot", export_dot(graph))
    stage.write_bytes(f"structure_{rep}.graphml", export_graphml(graph))
    write_json(structure_summary(graph), stage.path(f"structure_{rep}.json"))


def write_flows(stage: ArtifactStage, engine: ClusterEngine, config: RunConfig) -> None:
    graph = flow_graph(
        engine,
        top_n=config.top_n,
        rank_by=config.rank_by,
        clusters=config.clusters,
        min_flow=config.min_flow,
        include_self_loops=config.self_loops,
    )
    conflicts = apply_tags(graph, engine, load_tags(config.tags)) if config.tags else []
    stage.write_bytes("flows.dot", export_dot(graph))
    stage.write_bytes("flows.graphml", export_graphml(graph))
    payload = vars(flow_accounting(graph)).copy()
    payload["tag_conflicts"] = [
        {"representative": c.representative, "tags": [[t.address, t.label, t.category.value] for t in c.tags]}
        for c in conflicts
    ]
    write_json(payload, stage.path("flows.json"))


def _largest_cluster(engine: ClusterEngine) -> int:
    sizes = engine.cluster_sizes()
    if not sizes:
        raise UnknownCluster("the stream holds no addresses, so there is no cluster to draw")
    return min(sizes, key=lambda rep: (-sizes[rep], rep))


ALL_WRITERS = [
    write_clusters,
    write_metrics,
    write_histogram,
    write_quantiles,
    write_superclusters,
    write_flags,
    write_structure,
    write_flows,
]
