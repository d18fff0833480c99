"""Infrequent-pair accuracy and candidate mining among negative-labeled pairs."""

import logging
from dataclasses import asdict, dataclass
from typing import List, Optional

import numpy as np
import pandas as pd

from adrsignal.errors import ConfigError
from adrsignal.labels.split import LabeledPairSet


log = logging.getLogger("adrsignal")

CANDIDATE_THRESHOLD = 0.97
POSITIVE_CUTOFF = 0.5
SCOPES = ("test", "labeled", "all")
CANDIDATE_COLUMNS = ["drug_code", "icd10_code", "gnn_prob", "nn_prob"]


@dataclass(frozen=True)
class CandidatePair:
    drug_code: str
    icd10_code: str
    gnn_prob: float
    nn_prob: float

    def to_dict(self) -> dict:
        return asdict(self)


def rare_accuracy(scores, cutoff: float = POSITIVE_CUTOFF) -> Optional[float]:
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        return None
    return float(np.mean(scores > cutoff))


def evaluate_rare(trained, labeled: LabeledPairSet, split: str = "test") -> Optional[float]:
    """
    Fraction of ``split`` positives labeled rare or post-marketing that the
    model scores above 0.5. ``None`` when there are no such positives.
    """
    rare = labeled.infrequent()
    rare = rare[(rare["split"] == split) & (rare["label"] == 1)]
    if rare.empty:
        log.info("no infrequent positives in %s split", split, extra={"event": "evaluate"})
        return None
    return rare_accuracy(trained.predict_frame(rare))


def _candidate_pool(labeled: LabeledPairSet, scope: str, n_drug: int, n_dis: int) -> pd.DataFrame:
    if scope == "test":
        pool = labeled.subset("test")
        return pool[pool["label"] == 0][["drug_id", "dis_id"]]
    if scope == "labeled":
        return labeled.negatives()[["drug_id", "dis_id"]]
    drugs, diseases = np.meshgrid(np.arange(n_drug), np.arange(n_dis), indexing="ij")
    grid = pd.DataFrame({"drug_id": drugs.reshape(-1), "dis_id": diseases.reshape(-1)})
    positives = labeled.positives()[["drug_id", "dis_id"]].assign(_pos=True)
    grid = grid.merge(positives, on=["drug_id", "dis_id"], how="left")
    return grid[grid["_pos"].isna()][["drug_id", "dis_id"]]


def discover_candidates(
    gnn,
    nn,
    labeled: LabeledPairSet,
    threshold: float = CANDIDATE_THRESHOLD,
    scope: str = "test",
) -> List[CandidatePair]:
    """
    Negative-labeled pairs the GNN scores above ``threshold`` while the
    baseline network does not call positive, by descending GNN probability.

    ``scope`` picks the pairs mined: negatives of the test split, every
    labeled negative, or every drug-disease pair of the graph without a
    positive label.
    """
    if scope not in SCOPES:
        raise ConfigError(f"unknown candidate scope {scope!r}; expected one of {SCOPES}")
    graph = gnn.graph
    pool = _candidate_pool(labeled, scope, graph.n_drug, graph.n_dis)
    if pool.empty:
        return []
    drugs = pool["drug_id"].to_numpy()
    diseases = pool["dis_id"].to_numpy()
    gnn_prob = gnn.predict(drugs, diseases)
    nn_prob = nn.predict(drugs, diseases)

    keep = (gnn_prob > threshold) & (nn_prob <= POSITIVE_CUTOFF)
    order = np.argsort(-gnn_prob[keep], kind="stable")
    kept_drugs, kept_dis = drugs[keep][order], diseases[keep][order]
    candidates = [
        CandidatePair(graph.drug_codes[int(i)], graph.dis_codes[int(j)], float(g), float(n))
        for i, j, g, n in zip(kept_drugs, kept_dis, gnn_prob[keep][order], nn_prob[keep][order])
    ]
    log.info(
        "candidates_mined",
        extra={"event": "discover", "count": len(candidates), "stage": scope},
    )
    return candidates


def candidates_frame(candidates: List[CandidatePair]) -> pd.DataFrame:
    return pd.DataFrame([c.to_dict() for c in candidates], columns=CANDIDATE_COLUMNS)
