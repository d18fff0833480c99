import numpy as np
import pytest
import torch

from adrsignal.evaluation import (
    N_NEIGHBORS,
    NN_HIDDEN,
    LogisticBaseline,
    NeighborFeatures,
    PairMlp,
    baseline_lr_features,
    baseline_nn_score,
    nn_scores,
)
from adrsignal.graph.builder import EdgePartition, PartitionKind
from conftest import random_graph


def block_rows(vec, fd, fs, k=N_NEIGHBORS):
    """Split a pair vector into (drug neighbour blocks, disease neighbour blocks)."""
    body = vec[fd + fs:]
    width = fd + fs
    drug = body[: k * width].reshape(k, width)
    dis = body[k * width:].reshape(k, width)
    return drug, dis


def test_isolated_nodes_have_zero_blocks():
    graph = random_graph(seed=1, density=0.0)
    vec = baseline_lr_features((2, 3), graph)
    drug_blocks, dis_blocks = block_rows(vec, 5, 4)
    assert not drug_blocks.any()
    assert not dis_blocks.any()
    np.testing.assert_array_equal(vec[:5], graph.features_drug[2])
    np.testing.assert_array_equal(vec[5:9], graph.features_dis[3])


def test_three_neighbours_fill_three_blocks():
    graph = random_graph(seed=1, density=0.0)
    graph.partitions[PartitionKind.DRUG_DRUG] = EdgePartition(
        PartitionKind.DRUG_DRUG, [(0, 4, 0.9), (0, 7, 0.2)]
    )
    graph.partitions[PartitionKind.DRUG_DIS] = EdgePartition(PartitionKind.DRUG_DIS, [(0, 6, 0.5)])
    drug_blocks, _ = block_rows(baseline_lr_features((0, 1), graph), 5, 4)
    filled = [bool(row.any()) for row in drug_blocks]
    assert filled == [True, True, True] + [False] * 7
    # heaviest edge first; diseases land in the disease slot
    np.testing.assert_array_equal(drug_blocks[0, :5], graph.features_drug[4])
    np.testing.assert_array_equal(drug_blocks[1, 5:], graph.features_dis[6])
    assert not drug_blocks[1, :5].any()
    np.testing.assert_array_equal(drug_blocks[2, :5], graph.features_drug[7])


def test_feature_width_is_constant():
    graph = random_graph(seed=6, density=0.5)
    features = NeighborFeatures(graph)
    widths = {features.pair(i, j).shape[0] for i in range(graph.n_drug) for j in range(graph.n_dis)}
    assert widths == {features.width}
    assert features.width == 9 + 2 * N_NEIGHBORS * 9


def test_logistic_baseline_fits_and_reloads():
    graph = random_graph(seed=6, density=0.3)
    rng = np.random.default_rng(0)
    drugs = rng.integers(0, 10, size=40)
    diseases = rng.integers(0, 10, size=40)
    labels = np.arange(40) % 2
    model = LogisticBaseline(graph, l2=1e-3).fit(drugs, diseases, labels)
    p = model.predict(drugs, diseases)
    assert p.shape == (40,)
    assert np.all((p > 0) & (p < 1))

    clone = LogisticBaseline(graph, l2=1e-3).load_state(model.state())
    np.testing.assert_allclose(clone.predict(drugs, diseases), p, atol=1e-12)
    assert clone.model.C == model.model.C == pytest.approx(1.0 / (1e-3 * 40))


def test_nn_hidden_width():
    mlp = PairMlp(5, 4)
    assert NN_HIDDEN == 300
    assert mlp.hidden == 300
    assert tuple(mlp.w1.shape) == (9, 300)


def test_zero_weights_give_half():
    graph = random_graph(seed=2)
    mlp = PairMlp(5, 4, seed=1)
    with torch.no_grad():
        for param in mlp.parameters():
            param.zero_()
    assert baseline_nn_score((3, 4), mlp, graph) == 0.5


def test_same_seed_same_scores():
    graph = random_graph(seed=2)
    a = nn_scores(PairMlp(5, 4, seed=7), graph, [0, 1, 2], [3, 4, 5])
    b = nn_scores(PairMlp(5, 4, seed=7), graph, [0, 1, 2], [3, 4, 5])
    c = nn_scores(PairMlp(5, 4, seed=8), graph, [0, 1, 2], [3, 4, 5])
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_empty_pair_list():
    graph = random_graph(seed=2)
    assert NeighborFeatures(graph).matrix([], []).shape == (0, NeighborFeatures(graph).width)
    assert nn_scores(PairMlp(5, 4), graph, [], []).shape == (0,)


@pytest.mark.parametrize("k", [1, 3])
def test_neighbour_limit_is_configurable(k):
    graph = random_graph(seed=4, density=0.9)
    assert baseline_lr_features((0, 0), graph, k=k).shape == (9 + 2 * k * 9,)
