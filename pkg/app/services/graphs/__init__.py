from app.services.graphs.export import CATEGORY_COLORS, category_color, export_dot, export_graphml
from app.services.graphs.flows import FlowAccounting, flow_accounting, flow_graph, received_by_cluster, select_clusters
from app.services.graphs.structure import bipartite_subgraph, structure_summary
from app.services.graphs.tags import TagConflict, apply_tags, cluster_tags, load_tags

__all__ = [
    "CATEGORY_COLORS",
    "FlowAccounting",
    "TagConflict",
    "apply_tags",
    "bipartite_subgraph",
    "category_color",
    "cluster_tags",
    "export_dot",
    "export_graphml",
    "flow_accounting",
    "flow_graph",
    "load_tags",
    "received_by_cluster",
    "select_clusters",
    "structure_summary",
]
