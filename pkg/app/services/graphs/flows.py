"""
Inter-cluster value flow graph.

Every non-coinbase transaction with at least one resolved input has a single
input cluster A; each of its outputs adds its full value to the edge
A -> (cluster of the output's first address). No fee modelling.
"""

import logging
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING, Dict, List, Literal, Optional, Sequence, Tuple

import networkx as nx

from app.core.exceptions import InvalidParams, NotARepresentative, SingleInputClusterViolation, UnknownCluster

if TYPE_CHECKING:
    from app.services.cluster_engine import ClusterEngine

logger = logging.getLogger(__name__)

RankBy = Literal["size", "received"]


def cluster_node(representative: int) -> str:
    return f"c{representative}"


@dataclass
class FlowAccounting:
    """Satoshi buckets over the covered transactions; they sum to total_sat."""

    exported_sat: int = 0
    filtered_sat: int = 0
    self_loop_sat: int = 0
    unselected_sat: int = 0
    total_sat: int = 0
    covered_transactions: int = 0

    @property
    def balanced(self) -> bool:
        return self.exported_sat + self.filtered_sat + self.self_loop_sat + self.unselected_sat == self.total_sat


def received_by_cluster(engine: "ClusterEngine") -> Dict[int, int]:
    """Total output value received per cluster, attributing each output to its first address."""
    reps = engine.representatives()
    log = engine.log
    received: Dict[int, int] = {}
    for o, value in enumerate(log.output_values):
        start, end = log.output_addr_offsets[o], log.output_addr_offsets[o + 1]
        if start == end:
            continue
        rep = reps[log.output_addr_ids[start]]
        received[rep] = received.get(rep, 0) + value
    return received


def select_clusters(
    engine: "ClusterEngine",
    top_n: int = 10,
    rank_by: RankBy = "size",
    clusters: Optional[Sequence[int]] = None,
) -> List[int]:
    """Explicit representatives when given, else the top_n clusters by size or total received."""
    if clusters:
        for rep in clusters:
            try:
                engine.cluster_size(rep)
            except NotARepresentative as e:
                raise UnknownCluster(f"{rep} is not a cluster representative") from e
        return sorted(set(clusters))
    if top_n < 1:
        raise InvalidParams(f"top_n must be >= 1, got {top_n}")
    sizes = engine.cluster_sizes()
    if rank_by == "size":
        ranked = sorted(sizes, key=lambda rep: (-sizes[rep], rep))
    elif rank_by == "received":
        received = received_by_cluster(engine)
        ranked = sorted(sizes, key=lambda rep: (-received.get(rep, 0), rep))
    else:
        raise InvalidParams(f"unknown ranking {rank_by!r}")
    return sorted(ranked[:top_n])


def flow_graph(
    engine: "ClusterEngine",
    top_n: int = 10,
    rank_by: RankBy = "size",
    clusters: Optional[Sequence[int]] = None,
    min_flow: int = 0,
    include_self_loops: bool = False,
) -> nx.DiGraph:
    if min_flow < 0:
        raise InvalidParams(f"min_flow must be >= 0, got {min_flow}")
    selected = select_clusters(engine, top_n, rank_by, clusters)
    selected_set = set(selected)
    reps = engine.representatives()
    log = engine.log

    accounting = FlowAccounting()
    flows: Dict[Tuple[int, int], int] = {}
    for ordinal in range(len(log)):
        if log.is_coinbase[ordinal]:
            continue
        spent = log.spent_addresses_of(ordinal)
        if not spent:
            continue
        sources = {reps[a] for a in spent}
        if len(sources) != 1:
            raise SingleInputClusterViolation(
                f"transaction {ordinal} spends from {len(sources)} clusters after clustering"
            )
        source = sources.pop()
        accounting.covered_transactions += 1
        for value, ids in log.outputs_of(ordinal):
            accounting.total_sat += value
            target = reps[ids[0]] if ids else None
            if source not in selected_set or target not in selected_set:
                accounting.unselected_sat += value
            elif source == target and not include_self_loops:
                accounting.self_loop_sat += value
            else:
                flows[(source, target)] = flows.get((source, target), 0) + value

    sizes = engine.cluster_sizes()
    graph = nx.DiGraph(kind="flow", min_flow=min_flow, include_self_loops=include_self_loops)
    for rep in selected:
        graph.add_node(cluster_node(rep), representative=rep, size=sizes[rep], label="", category="")
    for (source, target), weight in sorted(flows.items()):
        if weight < min_flow:
            accounting.filtered_sat += weight
            continue
        accounting.exported_sat += weight
        graph.add_edge(cluster_node(source), cluster_node(target), weight_sat=weight)

    for node, centrality in nx.degree_centrality(graph).items():
        graph.nodes[node]["degree_centrality"] = centrality
    graph.graph.update(asdict(accounting))

    assert accounting.balanced, f"flow buckets do not sum to the total: {accounting}"
    logger.info(
        f"Flow graph over {len(selected)} clusters: {graph.number_of_edges()} edges, "
        f"{accounting.exported_sat} of {accounting.total_sat} sat exported"
    )
    return graph


def flow_accounting(graph: nx.DiGraph) -> FlowAccounting:
    return FlowAccounting(**{k: graph.graph[k] for k in FlowAccounting.__dataclass_fields__})
