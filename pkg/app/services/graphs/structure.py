"""
Per-cluster bipartite address/transaction graphs.
"""

import logging
from typing import TYPE_CHECKING

import networkx as nx
from networkx.algorithms import bipartite

if TYPE_CHECKING:
    from app.services.cluster_engine import ClusterEngine

logger = logging.getLogger(__name__)


def address_node(dense: int) -> str:
    return f"a{dense}"


def transaction_node(ordinal: int) -> str:
    return f"t{ordinal}"


def bipartite_subgraph(engine: "ClusterEngine", cluster: int) -> nx.Graph:
    """Address vertices of the cluster joined to every transaction that spent from them.

    Raises UnknownCluster when cluster is not a current representative.
    Balances are the engine's values at build time.
    """
    members = engine.members(cluster)
    member_set = set(members)
    graph = nx.Graph(kind="bipartite", representative=cluster)

    for dense in members:
        graph.add_node(
            address_node(dense),
            kind="address",
            bipartite=0,
            external=engine.addresses[dense],
            current_sat=engine.current_balance[dense],
            max_sat=engine.max_balance[dense],
        )

    log = engine.log
    for ordinal in range(len(log)):
        spent = log.spent_addresses_of(ordinal)
        # spent addresses of one transaction always share a cluster
        if not spent or spent[0] not in member_set:
            continue
        node = transaction_node(ordinal)
        graph.add_node(node, kind="transaction", bipartite=1, txid=log.txids[ordinal].hex(), ordinal=ordinal)
        for dense in spent:
            graph.add_edge(node, address_node(dense))

    logger.debug(
        f"Bipartite graph for cluster {cluster}: {len(members)} addresses, "
        f"{graph.number_of_nodes() - len(members)} transactions"
    )
    return graph


def structure_summary(graph: nx.Graph) -> dict:
    """Vertex counts and shape checks for a bipartite cluster graph."""
    addresses = [n for n, kind in graph.nodes(data="kind") if kind == "address"]
    transactions = graph.number_of_nodes() - len(addresses)
    return {
        "representative": graph.graph.get("representative"),
        "address_vertices": len(addresses),
        "funded_address_vertices": sum(1 for n in addresses if graph.nodes[n]["current_sat"] > 0),
        "transaction_vertices": transactions,
        "edges": graph.number_of_edges(),
        "peripheral_address_vertices": sum(1 for n in addresses if graph.degree(n) == 1),
        "connected_components": nx.number_connected_components(graph) if graph.number_of_nodes() else 0,
        "is_bipartite": bipartite.is_bipartite(graph),
    }
