import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from adrsignal.claims.models import PatientRecord
from adrsignal.embedding.skipgram import EmbeddingTable
from adrsignal.errors import VocabularyError
from adrsignal.hierarchy.codes import CategoryEncoder


log = logging.getLogger("adrsignal")


class PartitionKind(str, Enum):
    DRUG_DRUG = "drug_drug"
    DIS_DIS = "dis_dis"
    DRUG_DIS = "drug_dis"


class SparsityProfile(str, Enum):
    LOW = "low"
    HIGH = "high"


class GraphConfig(BaseModel):
    """
    Edge-forming parameters. ``None`` thresholds and ``theta`` are resolved
    from the pairwise embedding distances of each node kind.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    theta: Optional[float] = Field(None, gt=0)
    drug_threshold: Optional[float] = Field(None, gt=0)
    dis_threshold: Optional[float] = Field(None, gt=0)
    hetero_min_count: int = Field(1, ge=1)
    sparsity_profile: SparsityProfile = SparsityProfile.LOW
    low_percentile: float = Field(60.0, gt=0, le=100)
    high_percentile: float = Field(30.0, gt=0, le=100)
    dis_percentile: float = Field(60.0, gt=0, le=100)

    @property
    def drug_percentile(self) -> float:
        if self.sparsity_profile is SparsityProfile.HIGH:
            return self.high_percentile
        return self.low_percentile


@dataclass
class EdgePartition:
    kind: PartitionKind
    edges: List[Tuple[int, int, float]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.edges)

    def arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self.edges:
            return np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, np.float64)
        i, j, w = zip(*self.edges)
        return np.asarray(i, np.int64), np.asarray(j, np.int64), np.asarray(w, np.float64)

    def pairs(self) -> set:
        return {(i, j) for i, j, _ in self.edges}


@dataclass
class DrugDiseaseGraph:
    """
    Heterogeneous drug-disease graph.

    Node ids are local to their kind; ``drug_dis`` edges store (drug id,
    disease id). Homogeneous edges are stored once with ``i < j``.
    """

    n_drug: int
    n_dis: int
    partitions: Dict[PartitionKind, EdgePartition]
    features_drug: np.ndarray
    features_dis: np.ndarray
    drug_codes: Tuple[str, ...] = ()
    dis_codes: Tuple[str, ...] = ()
    embedding_dim: int = 0
    resolved: Dict[str, float] = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return self.n_drug + self.n_dis

    def partition(self, kind) -> EdgePartition:
        return self.partitions[PartitionKind(kind)]

    def drug_index(self) -> Dict[str, int]:
        return {c: i for i, c in enumerate(self.drug_codes)}

    def dis_index(self) -> Dict[str, int]:
        return {c: i for i, c in enumerate(self.dis_codes)}

    def neighbor_lists(self) -> Tuple[List[List[Tuple[str, int, float]]], List[List[Tuple[str, int, float]]]]:
        """Weighted neighbours of every drug and every disease node as (kind, id, weight)."""
        drugs: List[List[Tuple[str, int, float]]] = [[] for _ in range(self.n_drug)]
        diseases: List[List[Tuple[str, int, float]]] = [[] for _ in range(self.n_dis)]
        for i, j, w in self.partitions[PartitionKind.DRUG_DRUG].edges:
            drugs[i].append(("drug", j, w))
            drugs[j].append(("drug", i, w))
        for i, j, w in self.partitions[PartitionKind.DIS_DIS].edges:
            diseases[i].append(("disease", j, w))
            diseases[j].append(("disease", i, w))
        for i, j, w in self.partitions[PartitionKind.DRUG_DIS].edges:
            drugs[i].append(("disease", j, w))
            diseases[j].append(("drug", i, w))
        return drugs, diseases


def homogeneous_edge_weight(vi: np.ndarray, vj: np.ndarray, theta: float, threshold: float) -> float:
    """Gaussian weight ``exp(-d^2 / 2 theta^2)`` for ``d <= threshold``, else 0."""
    d = float(np.linalg.norm(np.asarray(vi, np.float64) - np.asarray(vj, np.float64)))
    if d > threshold:
        return 0.0
    return math.exp(-(d * d) / (2.0 * theta * theta))


def pairwise_distances(vectors: np.ndarray, block: int = 64) -> np.ndarray:
    """Exact Euclidean distance matrix (identical rows give exactly 0)."""
    x = np.asarray(vectors, dtype=np.float64)
    n = x.shape[0]
    out = np.zeros((n, n), dtype=np.float64)
    for start in range(0, n, block):
        diff = x[start:start + block, None, :] - x[None, :, :]
        out[start:start + block] = np.sqrt(np.einsum("bnd,bnd->bn", diff, diff))
    return out


def _upper(dist: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(dist.shape[0], k=1)
    return dist[iu]


def default_theta(dist: np.ndarray) -> float:
    values = _upper(dist)
    if values.size == 0:
        return 1.0
    theta = float(np.median(values))
    return theta if theta > 0 else 1.0


def percentile_threshold(dist: np.ndarray, percentile: float) -> float:
    values = _upper(dist)
    if values.size == 0:
        return 1.0
    threshold = float(np.percentile(values, percentile))
    # keep exact duplicates connected even when most distances are zero
    return threshold if threshold > 0 else float(np.finfo(np.float64).tiny)


def cooccurrence_counts(
    records: Iterable[PatientRecord],
    drug_index: Mapping[str, int],
    dis_index: Mapping[str, int],
) -> Tuple[Dict[Tuple[int, int], int], Dict[int, int]]:
    """
    Per-patient counts: ``n_ij`` patients with drug i and diagnosis j in the
    same visit, ``n_j`` patients with diagnosis j anywhere.
    """
    n_ij: Dict[Tuple[int, int], int] = defaultdict(int)
    n_j: Dict[int, int] = defaultdict(int)
    for record in records:
        together = set()
        diagnosed = set()
        for visit in record.visits:
            dis_ids = [dis_index[c] for c in visit.diagnoses if c in dis_index]
            drug_ids = [drug_index[c] for c in visit.prescriptions if c in drug_index]
            diagnosed.update(dis_ids)
            together.update((i, j) for i in drug_ids for j in dis_ids)
        for j in diagnosed:
            n_j[j] += 1
        for pair in together:
            n_ij[pair] += 1
    return dict(n_ij), dict(n_j)


def heterogeneous_edge_weight(
    drug: str,
    disease: str,
    records: Iterable[PatientRecord],
    min_count: int = 1,
) -> float:
    """``n_ij / n_j`` for one drug/diagnosis pair; 0 when ``n_j == 0`` or ``n_ij < min_count``."""
    n_ij, n_j = cooccurrence_counts(records, {drug: 0}, {disease: 0})
    return _hetero_ratio(n_ij.get((0, 0), 0), n_j.get(0, 0), min_count)


def _hetero_ratio(n_ij: int, n_j: int, min_count: int) -> float:
    if n_j == 0 or n_ij < min_count:
        return 0.0
    return n_ij / n_j


def heterogeneous_edges(
    records: Sequence[PatientRecord],
    drug_codes: Sequence[str],
    dis_codes: Sequence[str],
    min_count: int,
) -> EdgePartition:
    drug_index = {c: i for i, c in enumerate(drug_codes)}
    dis_index = {c: i for i, c in enumerate(dis_codes)}
    n_ij, n_j = cooccurrence_counts(records, drug_index, dis_index)
    edges = []
    for (i, j) in sorted(n_ij):
        w = _hetero_ratio(n_ij[(i, j)], n_j.get(j, 0), min_count)
        if w > 0:
            edges.append((i, j, w))
    return EdgePartition(PartitionKind.DRUG_DIS, edges)


def _check_table(table: EmbeddingTable, encoder: CategoryEncoder, label: str) -> None:
    if not table.codes or len(table.codes) != table.vocab_size:
        raise VocabularyError(f"{label} embedding table lacks a code list matching its rows")
    if table.kind != encoder.kind:
        raise VocabularyError(f"{label} embedding/encoder kinds differ")


def build_graph(
    embeddings: Tuple[EmbeddingTable, EmbeddingTable],
    encoders: Tuple[CategoryEncoder, CategoryEncoder],
    records: Sequence[PatientRecord],
    config: GraphConfig,
) -> DrugDiseaseGraph:
    """
    Assemble the drug-disease graph: Gaussian-weighted homogeneous edges over
    skip-gram embeddings, co-prescription ratio edges between drugs and
    diagnoses, and node features ``[embedding || category multi-hot]``.
    """
    drug_table, dis_table = embeddings
    drug_enc, dis_enc = encoders
    _check_table(drug_table, drug_enc, "drug")
    _check_table(dis_table, dis_enc, "disease")
    if drug_table.dim != dis_table.dim:
        raise VocabularyError("drug and disease embeddings differ in dimension")

    drug_dist = pairwise_distances(drug_table.vectors)
    dis_dist = pairwise_distances(dis_table.vectors)
    theta_drug = config.theta or default_theta(drug_dist)
    theta_dis = config.theta or default_theta(dis_dist)
    drug_threshold = config.drug_threshold or percentile_threshold(drug_dist, config.drug_percentile)
    dis_threshold = config.dis_threshold or percentile_threshold(dis_dist, config.dis_percentile)

    partitions = {
        PartitionKind.DRUG_DRUG: _edges_from_dist(drug_dist, theta_drug, drug_threshold, PartitionKind.DRUG_DRUG),
        PartitionKind.DIS_DIS: _edges_from_dist(dis_dist, theta_dis, dis_threshold, PartitionKind.DIS_DIS),
        PartitionKind.DRUG_DIS: heterogeneous_edges(
            records, drug_table.codes, dis_table.codes, config.hetero_min_count
        ),
    }

    features_drug = np.hstack([drug_table.vectors, drug_enc.encode_many(drug_table.codes)])
    features_dis = np.hstack([dis_table.vectors, dis_enc.encode_many(dis_table.codes)])

    graph = DrugDiseaseGraph(
        n_drug=drug_table.vocab_size,
        n_dis=dis_table.vocab_size,
        partitions=partitions,
        features_drug=features_drug,
        features_dis=features_dis,
        drug_codes=tuple(drug_table.codes),
        dis_codes=tuple(dis_table.codes),
        embedding_dim=drug_table.dim,
        resolved={
            "theta_drug": theta_drug,
            "theta_dis": theta_dis,
            "drug_threshold": drug_threshold,
            "dis_threshold": dis_threshold,
        },
    )
    log.info(
        "graph_built",
        extra={
            "event": "graph",
            "profile": config.sparsity_profile.value,
            "count": sum(len(p) for p in partitions.values()),
        },
    )
    return graph


def _edges_from_dist(dist: np.ndarray, theta: float, threshold: float, kind: PartitionKind) -> EdgePartition:
    iu, ju = np.triu_indices(dist.shape[0], k=1)
    d = dist[iu, ju]
    keep = d <= threshold
    w = np.exp(-(d[keep] ** 2) / (2.0 * theta * theta))
    # underflowed weights are not edges
    edges = [(int(i), int(j), float(x)) for i, j, x in zip(iu[keep], ju[keep], w) if x > 0.0]
    return EdgePartition(kind, edges)


def _degrees(graph: DrugDiseaseGraph) -> Tuple[np.ndarray, np.ndarray]:
    deg_drug = np.zeros(graph.n_drug, dtype=np.int64)
    deg_dis = np.zeros(graph.n_dis, dtype=np.int64)
    i, j, _ = graph.partitions[PartitionKind.DRUG_DRUG].arrays()
    np.add.at(deg_drug, i, 1)
    np.add.at(deg_drug, j, 1)
    i, j, _ = graph.partitions[PartitionKind.DIS_DIS].arrays()
    np.add.at(deg_dis, i, 1)
    np.add.at(deg_dis, j, 1)
    i, j, _ = graph.partitions[PartitionKind.DRUG_DIS].arrays()
    np.add.at(deg_drug, i, 1)
    np.add.at(deg_dis, j, 1)
    return deg_drug, deg_dis


def _degree_summary(deg: np.ndarray) -> dict:
    if deg.size == 0:
        return {"min": 0, "max": 0, "mean": 0.0, "isolated": 0, "counts": {}}
    values, counts = np.unique(deg, return_counts=True)
    return {
        "min": int(deg.min()),
        "max": int(deg.max()),
        "mean": float(deg.mean()),
        "isolated": int((deg == 0).sum()),
        "counts": {str(int(v)): int(c) for v, c in zip(values, counts)},
    }


def graph_stats(graph: DrugDiseaseGraph, labeled=None, bins: int = 10) -> dict:
    """
    Summary of node counts, undirected edge counts per partition, weight
    histograms on [0, 1] and degree distributions; with a labeled set, the
    number of labeled pairs per split as well.
    """
    edges = {}
    histograms = {}
    for kind in PartitionKind:
        part = graph.partitions.get(kind, EdgePartition(kind))
        edges[kind.value] = len(part)
        _, _, w = part.arrays()
        counts, bin_edges = np.histogram(w, bins=bins, range=(0.0, 1.0))
        histograms[kind.value] = {
            "counts": [int(c) for c in counts],
            "edges": [float(e) for e in bin_edges],
        }
    deg_drug, deg_dis = _degrees(graph)
    stats = {
        "nodes": {"drug": graph.n_drug, "disease": graph.n_dis},
        "edges": edges,
        "weight_histograms": histograms,
        "degrees": {"drug": _degree_summary(deg_drug), "disease": _degree_summary(deg_dis)},
        "resolved": dict(graph.resolved),
    }
    if labeled is not None:
        stats["labeled_pairs"] = labeled.split_sizes()
    return stats
