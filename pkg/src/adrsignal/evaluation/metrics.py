import math
from typing import Sequence, Tuple

import numpy as np
from sklearn.metrics import roc_auc_score

from adrsignal.errors import AdrSignalError


class MetricError(AdrSignalError):
    pass


def _arrays(scores, labels) -> Tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(labels).reshape(-1).astype(np.int64)
    if s.shape != y.shape:
        raise MetricError(f"{s.size} scores for {y.size} labels")
    return s, y


def auroc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Probability a random positive outranks a random negative; ties count one half."""
    s, y = _arrays(scores, labels)
    if len(np.unique(y)) < 2:
        raise MetricError("AUROC needs both positive and negative labels")
    return float(roc_auc_score(y, s))


def auprc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """
    Average precision: mean of precision@k over the ranks k of the positives,
    ranking by descending score with ties kept in input order.
    """
    s, y = _arrays(scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise MetricError("AUPRC needs at least one positive label")
    order = np.argsort(-s, kind="stable")
    hits = y[order]
    precision_at_k = np.cumsum(hits) / np.arange(1, len(hits) + 1)
    return float(np.sum(precision_at_k[hits == 1]) / n_pos)


def confidence_interval(values: Sequence[float], z: float = 1.96) -> Tuple[float, float]:
    """Mean and 95% half-width under the normal approximation (0 for fewer than two values)."""
    arr = np.asarray([v for v in values if v is not None], dtype=np.float64)
    if arr.size == 0:
        return math.nan, math.nan
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, 0.0
    return mean, float(z * arr.std(ddof=1) / math.sqrt(arr.size))
