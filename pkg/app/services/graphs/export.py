"""
Deterministic DOT and GraphML serialization for structure and flow graphs.

Vertices are written addresses/clusters first, then transactions, each by
numeric id; edges follow the same ordering.
"""

import io
from typing import Tuple

import networkx as nx

CATEGORY_COLORS = {
    "darknet-market": "red",
    "gambling": "purple",
    "exchange": "green",
    "mining-pool": "blue",
    "payment-processor": "orange",
}
UNTAGGED_COLOR = "gray"


def node_order(node: str) -> Tuple[int, int]:
    return (1 if node[0] == "t" else 0, int(node[1:]))


def _edge_order(edge) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    u, v = edge[0], edge[1]
    return node_order(u), node_order(v)


def category_color(category: str) -> str:
    return CATEGORY_COLORS.get(category, UNTAGGED_COLOR)


def _quote(value) -> str:
    text = str(value).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{text}"'


def _attrs(pairs) -> str:
    return ", ".join(f"{key}={_quote(value)}" for key, value in pairs)


def _node_attrs(graph: nx.Graph, node: str, data: dict) -> str:
    kind = graph.graph.get("kind")
    if kind == "bipartite":
        if data["kind"] == "address":
            pairs = [
                ("label", data["external"]),
                ("shape", "ellipse"),
                ("fillcolor", "white"),
                ("current_sat", data["current_sat"]),
                ("max_sat", data["max_sat"]),
            ]
        else:
            pairs = [("label", node), ("shape", "box"), ("fillcolor", "gray"), ("txid", data["txid"])]
    else:
        label = data.get("label") or str(data["representative"])
        pairs = [
            ("label", label),
            ("fillcolor", category_color(data.get("category", ""))),
            ("size", data["size"]),
            ("category", data.get("category", "")),
        ]
    return _attrs(pairs)


def export_dot(graph: nx.Graph) -> bytes:
    directed = graph.is_directed()
    arrow = "->" if directed else "--"
    name = graph.graph.get("kind", "graph")
    if "representative" in graph.graph:
        name = f"{name}_{graph.graph['representative']}"

    lines = [f"{'digraph' if directed else 'graph'} {_quote(name)} {{", '  node [style="filled"];']
    for node in sorted(graph.nodes, key=node_order):
        lines.append(f"  {_quote(node)} [{_node_attrs(graph, node, graph.nodes[node])}];")

    edges = []
    for u, v, data in graph.edges(data=True):
        if not directed and node_order(u) > node_order(v):
            u, v = v, u
        edges.append((u, v, data))
    for u, v, data in sorted(edges, key=_edge_order):
        if "weight_sat" in data:
            attrs = f" [{_attrs([('weight_sat', data['weight_sat']), ('label', data['weight_sat'])])}]"
        else:
            attrs = ""
        lines.append(f"  {_quote(u)} {arrow} {_quote(v)}{attrs};")
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _canonical(graph: nx.Graph) -> nx.Graph:
    ordered = graph.__class__()
    ordered.graph.update(graph.graph)
    for node in sorted(graph.nodes, key=node_order):
        data = dict(graph.nodes[node])
        if graph.graph.get("kind") == "flow":
            data["color"] = category_color(data.get("category", ""))
        elif "kind" in data:
            data["color"] = "white" if data["kind"] == "address" else "gray"
        ordered.add_node(node, **data)
    for u, v, data in sorted(graph.edges(data=True), key=_edge_order):
        ordered.add_edge(u, v, **data)
    return ordered


def export_graphml(graph: nx.Graph) -> bytes:
    buf = io.BytesIO()
    nx.write_graphml(_canonical(graph), buf)
    return buf.getvalue()
