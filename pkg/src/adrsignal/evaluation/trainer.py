import copy
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd
import torch
from pydantic import BaseModel, ConfigDict, Field

from adrsignal.errors import DivergenceError, SplitError
from adrsignal.evaluation.baselines import NN_HIDDEN, LogisticBaseline, PairMlp, nn_scores, pair_inputs
from adrsignal.evaluation.metrics import MetricError, auprc, auroc
from adrsignal.gnn.checkpoint import encode_state, load_checkpoint, save_checkpoint
from adrsignal.gnn.config import GnnConfig, Variant
from adrsignal.gnn.model import AdrGnn, cross_entropy
from adrsignal.gnn.tensors import DTYPE, GraphTensors, to_tensors
from adrsignal.graph.builder import DrugDiseaseGraph, SparsityProfile
from adrsignal.labels.split import LabeledPairSet
from adrsignal.utils.metrics import training_epochs_total
from helpers.saver import atomic_write_bytes


log = logging.getLogger("adrsignal")


class ModelKind(str, Enum):
    LR = "lr"
    NN = "nn"
    GCN = "gcn"
    GAT = "gat"
    ADRGCN = "adrgcn"

    @property
    def is_graph(self) -> bool:
        return self in (ModelKind.GCN, ModelKind.GAT, ModelKind.ADRGCN)


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    model: ModelKind = ModelKind.GCN
    sparsity_profile: SparsityProfile = SparsityProfile.LOW
    epochs: int = Field(200, ge=1)
    learning_rate: float = Field(1e-3, gt=0)
    early_stop_patience: int = Field(10, ge=1)
    seed: int = Field(0, ge=0)
    lr_l2: float = Field(1e-4, gt=0)
    nn_hidden: int = Field(NN_HIDDEN, ge=1)


@dataclass
class TrainedModel:
    kind: ModelKind
    config: TrainConfig
    module: Union[AdrGnn, PairMlp, LogisticBaseline]
    graph: DrugDiseaseGraph
    history: List[Dict[str, float]] = field(default_factory=list)
    best_epoch: int = 0
    tensors: Optional[GraphTensors] = None

    def predict(self, drugs, diseases) -> np.ndarray:
        drugs = np.asarray(drugs, dtype=np.int64)
        diseases = np.asarray(diseases, dtype=np.int64)
        if len(drugs) == 0:
            return np.zeros(0)
        if self.kind is ModelKind.LR:
            return self.module.predict(drugs, diseases)
        if self.kind is ModelKind.NN:
            return nn_scores(self.module, self.graph, drugs, diseases)
        return self.module.predict(self.tensors, drugs, diseases)

    def predict_frame(self, frame: pd.DataFrame) -> np.ndarray:
        return self.predict(frame["drug_id"].to_numpy(), frame["dis_id"].to_numpy())


def _validation_score(scores: np.ndarray, labels: np.ndarray) -> float:
    """Validation AUROC, or minus the validation log-loss when a class is missing."""
    try:
        return auroc(scores, labels)
    except MetricError:
        p = torch.as_tensor(scores, dtype=DTYPE)
        return -float(cross_entropy(p, torch.as_tensor(labels, dtype=DTYPE)))


def build_module(config: TrainConfig, graph: DrugDiseaseGraph, gnn_config: Optional[GnnConfig] = None):
    if config.model is ModelKind.NN:
        return PairMlp(graph.features_drug.shape[1], graph.features_dis.shape[1], config.nn_hidden, config.seed)
    if config.model is ModelKind.LR:
        return LogisticBaseline(graph, l2=config.lr_l2, seed=config.seed)
    base = gnn_config or GnnConfig(variant=Variant(config.model.value))
    gnn_config = base.model_copy(update={"variant": Variant(config.model.value), "seed": config.seed})
    gnn_config = GnnConfig.model_validate(gnn_config.model_dump())
    return AdrGnn(gnn_config, graph.features_drug.shape[1], graph.features_dis.shape[1])


def train_model(
    config: TrainConfig,
    graph: DrugDiseaseGraph,
    labeled: LabeledPairSet,
    gnn_config: Optional[GnnConfig] = None,
) -> TrainedModel:
    """
    Fit one model on the train split, selecting the epoch with the best
    validation AUROC and stopping after ``early_stop_patience`` epochs
    without improvement.
    """
    train = labeled.subset("train")
    val = labeled.subset("val")
    if train.empty:
        raise SplitError("labeled set has no training pairs")

    module = build_module(config, graph, gnn_config)
    tensors = to_tensors(graph) if config.model.is_graph else None
    trained = TrainedModel(config.model, config, module, graph, tensors=tensors)

    y_train = train["label"].to_numpy(dtype=np.int64)
    y_val = val["label"].to_numpy(dtype=np.int64)

    if config.model is ModelKind.LR:
        module.fit(train["drug_id"].to_numpy(), train["dis_id"].to_numpy(), y_train)
        p = torch.as_tensor(trained.predict_frame(train), dtype=DTYPE)
        loss = float(cross_entropy(p, torch.as_tensor(y_train, dtype=DTYPE)))
        score = _validation_score(trained.predict_frame(val), y_val) if len(val) else -loss
        trained.history.append({"epoch": 1, "loss": loss, "val_score": score})
        trained.best_epoch = 1
        training_epochs_total.labels(model=config.model.value).inc()
        return trained

    optimizer = torch.optim.Adam(module.parameters(), lr=config.learning_rate)
    y_t = torch.as_tensor(y_train, dtype=DTYPE)
    drugs_t = torch.as_tensor(train["drug_id"].to_numpy(), dtype=torch.long)
    dis_t = torch.as_tensor(train["dis_id"].to_numpy(), dtype=torch.long)
    if config.model is ModelKind.NN:
        x_drug, x_dis = pair_inputs(graph, drugs_t.numpy(), dis_t.numpy())

    best_score = -math.inf
    best_state = copy.deepcopy(module.state_dict())
    stale = 0
    for epoch in range(1, config.epochs + 1):
        module.train()
        optimizer.zero_grad()
        if config.model is ModelKind.NN:
            p = module(x_drug, x_dis)
        else:
            p = module(tensors, drugs_t, dis_t)
        loss = cross_entropy(p, y_t)
        loss_value = float(loss.detach())
        if not math.isfinite(loss_value):
            log.error("training_diverged", extra={"event": "train", "model": config.model.value, "epoch": epoch})
            raise DivergenceError(epoch, loss_value)
        loss.backward()
        optimizer.step()
        training_epochs_total.labels(model=config.model.value).inc()

        score = _validation_score(trained.predict_frame(val), y_val) if len(val) else -loss_value
        trained.history.append({"epoch": epoch, "loss": loss_value, "val_score": score})
        log.debug(
            "epoch_done",
            extra={"event": "train", "model": config.model.value, "epoch": epoch, "loss": loss_value, "auroc": score},
        )
        if score > best_score:
            best_score = score
            best_state = copy.deepcopy(module.state_dict())
            trained.best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= config.early_stop_patience:
                break

    module.load_state_dict(best_state)
    log.info(
        "model_trained",
        extra={
            "event": "train",
            "model": config.model.value,
            "seed": config.seed,
            "epoch": trained.best_epoch,
            "auroc": best_score,
        },
    )
    return trained


def evaluate_split(trained: TrainedModel, labeled: LabeledPairSet, split: str = "test") -> Dict[str, Optional[float]]:
    """AUROC and AUPRC on one split; ``None`` where the split cannot support the metric."""
    part = labeled.subset(split)
    scores = trained.predict_frame(part)
    labels = part["label"].to_numpy(dtype=np.int64)
    out: Dict[str, Optional[float]] = {"pairs": int(len(part))}
    try:
        out["auroc"] = auroc(scores, labels)
    except MetricError:
        out["auroc"] = None
    try:
        out["auprc"] = auprc(scores, labels)
    except MetricError:
        out["auprc"] = None
    return out


def save_trained(trained: TrainedModel, path) -> str:
    """Checkpoint a trained model with the configs needed to rebuild it."""
    meta = {"model": trained.kind.value, "train": trained.config.model_dump(mode="json"), "best_epoch": trained.best_epoch}
    if trained.kind is ModelKind.LR:
        return atomic_write_bytes(Path(path), encode_state(trained.module.state(), meta))
    if trained.kind.is_graph:
        meta["gnn"] = trained.module.config.model_dump(mode="json")
    return save_checkpoint(trained.module, path, meta)


def load_trained(path, graph: DrugDiseaseGraph) -> TrainedModel:
    state, meta = load_checkpoint(path)
    config = TrainConfig.model_validate(meta["train"])
    kind = ModelKind(meta["model"])
    if kind is ModelKind.LR:
        module = LogisticBaseline(graph, l2=config.lr_l2, seed=config.seed).load_state(state)
    else:
        if kind is ModelKind.NN:
            module = build_module(config, graph)
        else:
            module = AdrGnn(GnnConfig.model_validate(meta["gnn"]), graph.features_drug.shape[1], graph.features_dis.shape[1])
        module.load_state_dict(state)
    tensors = to_tensors(graph) if kind.is_graph else None
    return TrainedModel(kind, config, module, graph, best_epoch=int(meta.get("best_epoch", 0)), tensors=tensors)
