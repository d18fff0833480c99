"""Non-graph baselines: neighbourhood-feature logistic regression and a 2-layer network."""

from typing import Dict, List, Sequence

import numpy as np
import torch
import torch.nn as nn
from sklearn.linear_model import LogisticRegression

from adrsignal.gnn.layers import glorot_
from adrsignal.gnn.tensors import DTYPE
from adrsignal.graph.builder import DrugDiseaseGraph


N_NEIGHBORS = 10
NN_HIDDEN = 300


class NeighborFeatures:
    """
    Fixed-layout pair features for the logistic-regression baseline:
    ``[drug | disease | 10 drug-neighbour blocks | 10 disease-neighbour blocks]``.

    Every neighbour block is ``[drug slot | disease slot]`` with the
    neighbour's initial features in its kind's slot. Neighbours are the
    heaviest edges first; missing neighbours leave zero blocks.
    """

    def __init__(self, graph: DrugDiseaseGraph, k: int = N_NEIGHBORS):
        self.graph = graph
        self.k = k
        self.fd = graph.features_drug.shape[1]
        self.fs = graph.features_dis.shape[1]
        drug_lists, dis_lists = graph.neighbor_lists()
        self._drug_blocks = [self._blocks(n) for n in drug_lists]
        self._dis_blocks = [self._blocks(n) for n in dis_lists]

    @property
    def width(self) -> int:
        return self.fd + self.fs + 2 * self.k * (self.fd + self.fs)

    def _blocks(self, neighbors) -> np.ndarray:
        ranked = sorted(neighbors, key=lambda t: (-t[2], t[0], t[1]))[: self.k]
        out = np.zeros((self.k, self.fd + self.fs), dtype=np.float64)
        for row, (kind, idx, _) in enumerate(ranked):
            if kind == "drug":
                out[row, : self.fd] = self.graph.features_drug[idx]
            else:
                out[row, self.fd:] = self.graph.features_dis[idx]
        return out.reshape(-1)

    def pair(self, drug: int, disease: int) -> np.ndarray:
        return np.concatenate(
            [
                self.graph.features_drug[drug],
                self.graph.features_dis[disease],
                self._drug_blocks[drug],
                self._dis_blocks[disease],
            ]
        )

    def matrix(self, drugs: Sequence[int], diseases: Sequence[int]) -> np.ndarray:
        if len(drugs) == 0:
            return np.zeros((0, self.width))
        return np.vstack([self.pair(int(i), int(j)) for i, j in zip(drugs, diseases)])


def baseline_lr_features(pair, graph: DrugDiseaseGraph, k: int = N_NEIGHBORS) -> np.ndarray:
    return NeighborFeatures(graph, k).pair(int(pair[0]), int(pair[1]))


class LogisticBaseline:
    def __init__(self, graph: DrugDiseaseGraph, l2: float = 1e-4, seed: int = 0):
        self.features = NeighborFeatures(graph)
        self.l2 = l2
        self.seed = seed
        self.model: LogisticRegression = None

    def fit(self, drugs, diseases, labels) -> "LogisticBaseline":
        x = self.features.matrix(drugs, diseases)
        # sklearn's C weighs the summed loss; l2 is per-sample strength on the mean loss
        c = 1.0 / (self.l2 * max(1, len(labels)))
        self.model = LogisticRegression(C=c, max_iter=2000, random_state=self.seed)
        self.model.fit(x, np.asarray(labels, dtype=np.int64))
        return self

    def predict(self, drugs, diseases) -> np.ndarray:
        x = self.features.matrix(drugs, diseases)
        if len(x) == 0:
            return np.zeros(0)
        return self.model.predict_proba(x)[:, 1]

    def state(self) -> Dict[str, torch.Tensor]:
        return {
            "coef": torch.as_tensor(self.model.coef_, dtype=DTYPE),
            "intercept": torch.as_tensor(self.model.intercept_, dtype=DTYPE),
            "c": torch.tensor([self.model.C], dtype=DTYPE),
        }

    def load_state(self, state: Dict[str, torch.Tensor]) -> "LogisticBaseline":
        model = LogisticRegression(C=float(state["c"][0]), max_iter=2000, random_state=self.seed)
        model.classes_ = np.array([0, 1])
        model.coef_ = state["coef"].numpy().reshape(1, -1).copy()
        model.n_features_in_ = model.coef_.shape[1]
        model.intercept_ = state["intercept"].numpy().reshape(1).copy()
        self.model = model
        return self


class PairMlp(nn.Module):
    """Two fully-connected layers over ``[drug features || disease features]``, sigmoid output."""

    def __init__(self, drug_dim: int, dis_dim: int, hidden: int = NN_HIDDEN, seed: int = 0):
        super().__init__()
        gen = torch.Generator().manual_seed(seed)
        in_dim = drug_dim + dis_dim
        self.hidden = hidden
        self.w1 = nn.Parameter(glorot_(torch.empty(in_dim, hidden, dtype=DTYPE), in_dim, hidden, gen))
        self.b1 = nn.Parameter(torch.zeros(hidden, dtype=DTYPE))
        self.w2 = nn.Parameter(glorot_(torch.empty(hidden, 1, dtype=DTYPE), hidden, 1, gen))
        self.b2 = nn.Parameter(torch.zeros(1, dtype=DTYPE))

    def logits(self, x_drug: torch.Tensor, x_dis: torch.Tensor) -> torch.Tensor:
        h = torch.relu(torch.cat([x_drug, x_dis], dim=1) @ self.w1 + self.b1)
        return (h @ self.w2 + self.b2).squeeze(-1)

    def forward(self, x_drug: torch.Tensor, x_dis: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.logits(x_drug, x_dis))


def pair_inputs(graph: DrugDiseaseGraph, drugs, diseases):
    drugs = np.asarray(drugs, dtype=np.int64)
    diseases = np.asarray(diseases, dtype=np.int64)
    return (
        torch.as_tensor(graph.features_drug[drugs], dtype=DTYPE),
        torch.as_tensor(graph.features_dis[diseases], dtype=DTYPE),
    )


def baseline_nn_score(pair, params: PairMlp, graph: DrugDiseaseGraph) -> float:
    x_drug, x_dis = pair_inputs(graph, [pair[0]], [pair[1]])
    with torch.no_grad():
        return float(params(x_drug, x_dis)[0])


def nn_scores(params: PairMlp, graph: DrugDiseaseGraph, drugs, diseases) -> np.ndarray:
    x_drug, x_dis = pair_inputs(graph, drugs, diseases)
    with torch.no_grad():
        return params(x_drug, x_dis).numpy().copy()


__all__: List[str] = [
    "NeighborFeatures",
    "baseline_lr_features",
    "LogisticBaseline",
    "PairMlp",
    "baseline_nn_score",
    "nn_scores",
]
