__all__ = [
    "PartitionKind",
    "SparsityProfile",
    "GraphConfig",
    "EdgePartition",
    "DrugDiseaseGraph",
    "homogeneous_edge_weight",
    "heterogeneous_edge_weight",
    "cooccurrence_counts",
    "build_graph",
    "graph_stats",
    "save_graph",
    "load_graph",
]

from .builder import (
    PartitionKind,
    SparsityProfile,
    GraphConfig,
    EdgePartition,
    DrugDiseaseGraph,
    homogeneous_edge_weight,
    heterogeneous_edge_weight,
    cooccurrence_counts,
    build_graph,
    graph_stats,
)
from .store import save_graph, load_graph
