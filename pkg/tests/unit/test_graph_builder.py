import math

import numpy as np
import pytest

from adrsignal.claims.models import CodeKind
from adrsignal.claims.vocabulary import build_vocabularies
from adrsignal.embedding.skipgram import EmbeddingTable
from adrsignal.errors import VocabularyError
from adrsignal.graph import (
    GraphConfig,
    PartitionKind,
    SparsityProfile,
    build_graph,
    graph_stats,
    heterogeneous_edge_weight,
    homogeneous_edge_weight,
    load_graph,
    save_graph,
)
from adrsignal.graph.builder import _edges_from_dist
from adrsignal.hierarchy import CategoryEncoder
from conftest import record, visit


def test_homogeneous_weight_cases():
    v = np.array([0.3, -1.2, 2.0])
    assert homogeneous_edge_weight(v, v, theta=0.7, threshold=1.0) == 1.0

    theta = 0.5
    u = v + np.array([math.sqrt(2) * theta, 0.0, 0.0])
    assert homogeneous_edge_weight(v, u, theta, threshold=1.0) == pytest.approx(math.exp(-1.0), rel=1e-12)
    assert homogeneous_edge_weight(v, u, theta, threshold=0.5) == 0.0


def test_homogeneous_weight_is_symmetric_and_decreasing():
    rng = np.random.default_rng(4)
    a, b = rng.normal(size=5), rng.normal(size=5)
    assert homogeneous_edge_weight(a, b, 1.3, 10.0) == homogeneous_edge_weight(b, a, 1.3, 10.0)
    weights = [homogeneous_edge_weight(a, a + d, 1.0, 10.0) for d in np.linspace(0, 3, 20)]
    assert all(x > y for x, y in zip(weights, weights[1:]))


def test_heterogeneous_weight_ratio():
    recs = []
    for n in range(100):
        pid = f"p{n:03d}"
        rx = {"C03CA01"} if n < 25 else set()
        recs.append(record(pid, visit(pid, 1, rx=rx, dx={"I50"})))
    assert heterogeneous_edge_weight("C03CA01", "I50", recs) == pytest.approx(0.25)
    assert heterogeneous_edge_weight("C03CA01", "I50", recs[:25]) == 1.0
    assert heterogeneous_edge_weight("C03CA01", "E11", recs) == 0.0
    assert heterogeneous_edge_weight("C03CA01", "I50", recs, min_count=26) == 0.0


def test_heterogeneous_weight_counts_patients_in_same_visit(tiny_records):
    assert heterogeneous_edge_weight("C03CA01", "I50", tiny_records) == pytest.approx(2 / 3)
    # p1 takes N02BE01 only on a visit without diagnoses
    assert heterogeneous_edge_weight("N02BE01", "I50", tiny_records) == pytest.approx(1 / 3)


def inputs(records, seed=0, dim=3):
    drugs, diseases = build_vocabularies(records)
    rng = np.random.default_rng(seed)
    drug_vectors = rng.normal(size=(drugs.size, dim))
    drug_vectors[1] = drug_vectors[0]
    tables = (
        EmbeddingTable(CodeKind.DRUG, drug_vectors, drugs.id_to_code),
        EmbeddingTable(CodeKind.DISEASE, rng.normal(size=(diseases.size, dim)), diseases.id_to_code),
    )
    encoders = (
        CategoryEncoder.fit(CodeKind.DRUG, drugs.id_to_code),
        CategoryEncoder.fit(CodeKind.DISEASE, diseases.id_to_code),
    )
    return tables, encoders


def test_build_graph_features_and_edges(tiny_records):
    tables, encoders = inputs(tiny_records)
    graph = build_graph(tables, encoders, tiny_records, GraphConfig())

    assert graph.features_drug.shape == (3, 3 + encoders[0].total_dim)
    assert graph.features_dis.shape == (4, 3 + encoders[1].total_dim)
    assert np.all(graph.features_drug[:, 3:].sum(axis=1) == 5)
    assert np.all(graph.features_dis[:, 3:].sum(axis=1) == 2)

    drug_edges = {(i, j): w for i, j, w in graph.partition("drug_drug").edges}
    assert drug_edges[(0, 1)] == 1.0
    for kind in PartitionKind:
        for i, j, w in graph.partition(kind).edges:
            assert 0.0 < w <= 1.0
            if kind is not PartitionKind.DRUG_DIS:
                assert i < j


def test_build_graph_is_deterministic(tiny_records):
    tables, encoders = inputs(tiny_records)
    a = build_graph(tables, encoders, tiny_records, GraphConfig())
    b = build_graph(tables, encoders, tiny_records, GraphConfig())
    for kind in PartitionKind:
        assert a.partition(kind).edges == b.partition(kind).edges


def test_high_profile_edges_are_subset_of_low():
    rng = np.random.default_rng(7)
    recs = [record(f"p{k}", visit(f"p{k}", 1, rx={f"A01A{'ABCDEFGHIJ'[k]}01"}, dx={"I50"})) for k in range(10)]
    tables, encoders = inputs(recs, seed=int(rng.integers(100)), dim=4)
    low = build_graph(tables, encoders, recs, GraphConfig(sparsity_profile=SparsityProfile.LOW))
    high = build_graph(tables, encoders, recs, GraphConfig(sparsity_profile=SparsityProfile.HIGH))
    assert high.partition("drug_drug").pairs() <= low.partition("drug_drug").pairs()
    assert len(high.partition("drug_drug")) < len(low.partition("drug_drug"))
    assert high.partition("dis_dis").pairs() == low.partition("dis_dis").pairs()



def test_underflowed_weights_are_not_edges():
    dist = np.array([[0.0, 1.0, 1e3], [1.0, 0.0, 1e3], [1e3, 1e3, 0.0]])
    part = _edges_from_dist(dist, theta=1.0, threshold=np.inf, kind=PartitionKind.DRUG_DRUG)
    assert [(i, j) for i, j, _ in part.edges] == [(0, 1)]
    assert all(0.0 < w <= 1.0 for _, _, w in part.edges)

def test_inconsistent_vocabularies_raise(tiny_records):
    (drug_table, dis_table), encoders = inputs(tiny_records)
    with pytest.raises(VocabularyError):
        build_graph((dis_table, drug_table), encoders, tiny_records, GraphConfig())


def test_graph_stats_counts(small_graph):
    small_graph.partitions[PartitionKind.DIS_DIS].edges.clear()
    stats = graph_stats(small_graph)
    assert stats["nodes"] == {"drug": 10, "disease": 10}
    assert stats["edges"]["dis_dis"] == 0
    assert stats["edges"]["drug_drug"] == len(small_graph.partition("drug_drug"))
    assert sum(stats["weight_histograms"]["drug_dis"]["counts"]) == len(small_graph.partition("drug_dis"))
    degree_total = sum(int(k) * v for k, v in stats["degrees"]["drug"]["counts"].items())
    assert degree_total == 2 * len(small_graph.partition("drug_drug")) + len(small_graph.partition("drug_dis"))
    assert "labeled_pairs" not in stats


def test_graph_stats_labeled_pairs(small_graph, small_pairs):
    sizes = graph_stats(small_graph, small_pairs)["labeled_pairs"]
    assert {k: v["pairs"] for k, v in sizes.items()} == {"train": 60, "val": 20, "test": 20}
    assert sizes["train"]["positives"] == 20


def test_graph_files_round_trip(tmp_path, small_graph):
    save_graph(small_graph, tmp_path, {"theta": None})
    loaded = load_graph(tmp_path)
    assert loaded.drug_codes == small_graph.drug_codes
    np.testing.assert_array_equal(loaded.features_drug, small_graph.features_drug)
    for kind in PartitionKind:
        assert loaded.partition(kind).pairs() == small_graph.partition(kind).pairs()
        for (_, _, w1), (_, _, w2) in zip(loaded.partition(kind).edges, small_graph.partition(kind).edges):
            assert w1 == pytest.approx(w2, rel=1e-8)
    line = (tmp_path / "edges_drug_dis.txt").read_text().splitlines()[0]
    assert len(line.split()) == 3
