from dataclasses import dataclass
from typing import Dict, Tuple

import torch

from adrsignal.graph.builder import DrugDiseaseGraph, PartitionKind


DTYPE = torch.float64

Edges = Tuple[torch.Tensor, torch.Tensor, torch.Tensor]


@dataclass
class GraphTensors:
    """
    Message-passing view of a drug-disease graph. Drugs occupy global ids
    ``[0, n_drug)`` and diseases ``[n_drug, n_drug + n_dis)``; every stored
    edge appears in both directions as (src, dst, weight).
    """

    n_drug: int
    n_dis: int
    x_drug: torch.Tensor
    x_dis: torch.Tensor
    partitions: Dict[PartitionKind, Edges]
    degree: torch.Tensor

    @property
    def n_nodes(self) -> int:
        return self.n_drug + self.n_dis

    def union(self) -> Edges:
        parts = [self.partitions[k] for k in PartitionKind]
        return tuple(torch.cat([p[i] for p in parts]) for i in range(3))

    def gcn_alpha(self, edges: Edges) -> torch.Tensor:
        src, dst, w = edges
        return w / torch.sqrt(self.degree[src] * self.degree[dst])

    def self_alpha(self, self_loop_weight: float) -> torch.Tensor:
        return self_loop_weight / self.degree


def _directed(i, j, w, offset_i: int, offset_j: int) -> Edges:
    i = torch.as_tensor(i, dtype=torch.long) + offset_i
    j = torch.as_tensor(j, dtype=torch.long) + offset_j
    w = torch.as_tensor(w, dtype=DTYPE)
    return torch.cat([j, i]), torch.cat([i, j]), torch.cat([w, w])


def to_tensors(graph: DrugDiseaseGraph) -> GraphTensors:
    n_drug = graph.n_drug
    partitions = {}
    for kind, (off_i, off_j) in (
        (PartitionKind.DRUG_DRUG, (0, 0)),
        (PartitionKind.DIS_DIS, (n_drug, n_drug)),
        (PartitionKind.DRUG_DIS, (0, n_drug)),
    ):
        i, j, w = graph.partitions[kind].arrays()
        partitions[kind] = _directed(i, j, w, off_i, off_j)

    n = graph.n_nodes
    # unweighted neighbour count plus the self-loop
    degree = torch.ones(n, dtype=DTYPE)
    for src, dst, _ in partitions.values():
        degree.index_add_(0, dst, torch.ones(dst.shape[0], dtype=DTYPE))

    return GraphTensors(
        n_drug=n_drug,
        n_dis=graph.n_dis,
        x_drug=torch.as_tensor(graph.features_drug, dtype=DTYPE),
        x_dis=torch.as_tensor(graph.features_dis, dtype=DTYPE),
        partitions=partitions,
        degree=degree,
    )
