import numpy as np
import pytest

from adrsignal.errors import DivergenceError, SplitError
from adrsignal.evaluation import (
    ModelKind,
    TrainConfig,
    auroc,
    evaluate_split,
    load_trained,
    save_trained,
    train_model,
)
from adrsignal.gnn import GnnConfig
from adrsignal.labels.split import LabeledPairSet
from conftest import grid_pairs, random_graph


SMALL_GNN = GnnConfig(hidden_dim=8, gat_heads=(2, 2))


def test_train_config_rejects_zero_epochs():
    with pytest.raises(ValueError):
        TrainConfig(epochs=0)


def test_model_kinds():
    assert [k.is_graph for k in ModelKind] == [False, False, True, True, True]


@pytest.mark.parametrize("model", ["nn", "gcn", "gat", "adrgcn"])
def test_one_epoch_runs_exactly_once(model, small_graph, small_pairs):
    config = TrainConfig(model=model, epochs=1, early_stop_patience=1, seed=3)
    trained = train_model(config, small_graph, small_pairs, SMALL_GNN)
    assert len(trained.history) == 1
    assert trained.best_epoch == 1
    assert trained.history[0]["epoch"] == 1


def test_patience_stops_early(small_graph, small_pairs):
    config = TrainConfig(model="gcn", epochs=400, early_stop_patience=3, learning_rate=0.01, seed=1)
    trained = train_model(config, small_graph, small_pairs, SMALL_GNN)
    epochs = len(trained.history)
    assert trained.best_epoch <= epochs <= min(400, trained.best_epoch + 3)
    best = max(h["val_score"] for h in trained.history)
    assert trained.history[trained.best_epoch - 1]["val_score"] == best


def test_best_state_is_restored(small_graph, small_pairs):
    config = TrainConfig(model="nn", epochs=30, early_stop_patience=30, learning_rate=0.01, nn_hidden=16, seed=2)
    trained = train_model(config, small_graph, small_pairs)
    val = small_pairs.subset("val")
    restored = auroc(trained.predict_frame(val), val["label"].to_numpy())
    assert restored == pytest.approx(trained.history[trained.best_epoch - 1]["val_score"], abs=1e-12)


def test_logistic_regression_trains_once(small_graph, small_pairs):
    trained = train_model(TrainConfig(model="lr", seed=0), small_graph, small_pairs)
    assert len(trained.history) == 1
    metrics = evaluate_split(trained, small_pairs, "test")
    assert metrics["pairs"] == 20
    assert 0.0 <= metrics["auroc"] <= 1.0


def test_non_finite_loss_raises(small_pairs):
    graph = random_graph(seed=3)
    graph.features_drug[0, 0] = np.nan
    with pytest.raises(DivergenceError) as info:
        train_model(TrainConfig(model="gcn", epochs=5, seed=0), graph, small_pairs, SMALL_GNN)
    assert info.value.epoch == 1


def test_empty_train_split(small_graph, small_pairs):
    frame = small_pairs.frame.copy()
    frame["split"] = frame["split"].replace("train", "val")
    with pytest.raises(SplitError):
        train_model(TrainConfig(model="nn", epochs=2), small_graph, LabeledPairSet(frame))


@pytest.mark.parametrize("model", ["nn", "gat"])
def test_training_is_deterministic(model):
    runs = []
    for _ in range(2):
        graph = random_graph(seed=5)
        pairs = grid_pairs(graph)
        trained = train_model(TrainConfig(model=model, epochs=5, seed=4, nn_hidden=12), graph, pairs, SMALL_GNN)
        runs.append((trained.history, trained.predict_frame(pairs.frame)))
    assert runs[0][0] == runs[1][0]
    np.testing.assert_array_equal(runs[0][1], runs[1][1])


def test_single_class_validation_uses_loss(small_graph, small_pairs):
    frame = small_pairs.frame.copy()
    frame = frame[(frame["split"] != "val") | (frame["label"] == 1)]
    trained = train_model(TrainConfig(model="nn", epochs=3, nn_hidden=8), small_graph, LabeledPairSet(frame))
    assert all(h["val_score"] <= 0 for h in trained.history)


def parameters(trained):
    state = trained.module.state() if trained.kind is ModelKind.LR else trained.module.state_dict()
    return {name: tensor.numpy() for name, tensor in state.items()}


@pytest.mark.parametrize("model", ["lr", "nn", "gcn", "gat", "adrgcn"])
def test_save_and_load(model, tmp_path, small_graph, small_pairs):
    config = TrainConfig(model=model, epochs=3, nn_hidden=16, seed=6)
    trained = train_model(config, small_graph, small_pairs, SMALL_GNN)
    path = tmp_path / f"{model}.ckpt"
    save_trained(trained, path)
    loaded = load_trained(path, small_graph)
    assert loaded.kind is trained.kind
    assert loaded.config == trained.config
    assert loaded.best_epoch == trained.best_epoch
    frame = small_pairs.frame
    before, after = parameters(trained), parameters(loaded)
    assert list(after) == list(before)
    assert all(np.array_equal(after[name], before[name]) for name in before)
    assert np.array_equal(loaded.predict_frame(frame), trained.predict_frame(frame))
