"""
Per-run evaluation records and their aggregation into the model comparison
table (AUROC and AUPRC with 95% confidence intervals over seeds).
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from adrsignal.evaluation.discovery import POSITIVE_CUTOFF
from adrsignal.evaluation.metrics import confidence_interval
from adrsignal.labels.sider import FrequencyClass
from adrsignal.labels.split import LabeledPairSet


log = logging.getLogger("adrsignal")

MODEL_ORDER = ("lr", "nn", "gcn", "gat", "adrgcn")
PROFILE_ORDER = ("low", "high")
MODEL_LABELS = {"lr": "LR", "nn": "NN", "gcn": "GCN", "gat": "GAT", "adrgcn": "adrGCN"}

# AUROC / AUPRC measured on a national claims cohort, shown for context only.
REFERENCE_SCORES: Dict[Tuple[str, Optional[str]], Tuple[float, float]] = {
    ("lr", None): (0.631, 0.585),
    ("nn", None): (0.739, 0.701),
    ("gcn", "low"): (0.795, 0.775),
    ("gat", "low"): (0.732, 0.686),
    ("adrgcn", "low"): (0.755, 0.726),
    ("gcn", "high"): (0.784, 0.761),
    ("gat", "high"): (0.733, 0.692),
    ("adrgcn", "high"): (0.756, 0.732),
}


def reference_scores(model: str, profile: str) -> Optional[Tuple[float, float]]:
    return REFERENCE_SCORES.get((model, profile)) or REFERENCE_SCORES.get((model, None))


@dataclass
class RunResult:
    """Test-split metrics of one trained model for one seed."""

    model: str
    profile: str
    seed: int
    auroc: Optional[float]
    auprc: Optional[float]
    # frequency class -> [hits, total] over test positives
    frequency_hits: Dict[str, List[int]] = field(default_factory=dict)
    best_epoch: int = 0

    @property
    def key(self) -> Tuple[int, int, int]:
        return (MODEL_ORDER.index(self.model), PROFILE_ORDER.index(self.profile), self.seed)

    def rare_counts(self) -> Tuple[int, int]:
        hits = total = 0
        for cls in (FrequencyClass.RARE.value, FrequencyClass.POST_MARKETING.value):
            h, t = self.frequency_hits.get(cls, (0, 0))
            hits += h
            total += t
        return hits, total

    def rare_accuracy(self) -> Optional[float]:
        hits, total = self.rare_counts()
        return hits / total if total else None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunResult":
        return cls(**data)


def frequency_hits(scores, labeled_part) -> Dict[str, List[int]]:
    """Per frequency class, how many positives score above 0.5 out of how many."""
    positives = labeled_part["label"].to_numpy() == 1
    freq = labeled_part["frequency"].to_numpy()
    scores = np.asarray(scores, dtype=np.float64)
    out: Dict[str, List[int]] = {}
    for cls in FrequencyClass:
        mask = positives & (freq == cls.value)
        out[cls.value] = [int(np.sum(scores[mask] > POSITIVE_CUTOFF)), int(mask.sum())]
    return out


@dataclass
class ReportRow:
    model: str
    profile: str
    seeds: int
    auroc: Optional[float]
    auroc_ci: Optional[float]
    auprc: Optional[float]
    auprc_ci: Optional[float]
    rare_accuracy_pooled: Optional[float]
    rare_accuracy_mean: Optional[float]
    frequency_accuracy: Dict[str, Optional[float]]
    reference_auroc: Optional[float] = None
    reference_auprc: Optional[float] = None

    @property
    def label(self) -> str:
        return f"{MODEL_LABELS[self.model]}-{self.profile}"


@dataclass
class EvalReport:
    rows: List[ReportRow]
    split_sizes: Dict[str, Dict[str, int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"rows": [asdict(r) for r in self.rows], "split_sizes": self.split_sizes}


def _finite(value: float) -> Optional[float]:
    return None if value is None or math.isnan(value) else value


def _row(model: str, profile: str, runs: List[RunResult]) -> ReportRow:
    auroc, auroc_ci = confidence_interval([r.auroc for r in runs])
    auprc, auprc_ci = confidence_interval([r.auprc for r in runs])

    pooled_hits = sum(r.rare_counts()[0] for r in runs)
    pooled_total = sum(r.rare_counts()[1] for r in runs)
    per_seed = [r.rare_accuracy() for r in runs if r.rare_accuracy() is not None]

    frequency_accuracy = {}
    for cls in FrequencyClass:
        hits = sum(r.frequency_hits.get(cls.value, (0, 0))[0] for r in runs)
        total = sum(r.frequency_hits.get(cls.value, (0, 0))[1] for r in runs)
        frequency_accuracy[cls.value] = hits / total if total else None

    ref = reference_scores(model, profile)
    return ReportRow(
        model=model,
        profile=profile,
        seeds=len(runs),
        auroc=_finite(auroc),
        auroc_ci=_finite(auroc_ci),
        auprc=_finite(auprc),
        auprc_ci=_finite(auprc_ci),
        rare_accuracy_pooled=pooled_hits / pooled_total if pooled_total else None,
        rare_accuracy_mean=float(np.mean(per_seed)) if per_seed else None,
        frequency_accuracy=frequency_accuracy,
        reference_auroc=ref[0] if ref else None,
        reference_auprc=ref[1] if ref else None,
    )


def build_report(results: Iterable[RunResult], labeled: Optional[LabeledPairSet] = None) -> EvalReport:
    """Merge per-seed results by (model, profile) in table order."""
    grouped: Dict[Tuple[str, str], List[RunResult]] = {}
    for result in sorted(results, key=lambda r: r.key):
        grouped.setdefault((result.model, result.profile), []).append(result)
    rows = [_row(model, profile, runs) for (model, profile), runs in grouped.items()]
    return EvalReport(rows=rows, split_sizes=labeled.split_sizes() if labeled is not None else {})


def _fmt(value: Optional[float], ci: Optional[float] = None) -> str:
    if value is None:
        return "n/a"
    if ci is None:
        return f"{value:.3f}"
    return f"{value:.3f} ± {ci:.3f}"


def format_table(report: EvalReport) -> str:
    """Aligned text table, one row per model/profile, with the cohort reference values alongside."""
    header = ["Model", "Seeds", "AUROC", "AUPRC", "Rare acc (pooled)", "Rare acc (mean)", "Ref AUROC", "Ref AUPRC"]
    lines = [header]
    for row in report.rows:
        lines.append(
            [
                row.label,
                str(row.seeds),
                _fmt(row.auroc, row.auroc_ci),
                _fmt(row.auprc, row.auprc_ci),
                _fmt(row.rare_accuracy_pooled),
                _fmt(row.rare_accuracy_mean),
                _fmt(row.reference_auroc),
                _fmt(row.reference_auprc),
            ]
        )
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    out = []
    for n, line in enumerate(lines):
        out.append("  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip())
        if n == 0:
            out.append("  ".join("-" * w for w in widths))

    if report.split_sizes:
        out.append("")
        for split, sizes in report.split_sizes.items():
            out.append(
                f"{split}: {sizes['pairs']} pairs, {sizes['positives']} positives, {sizes['classes']} disease classes"
            )
    return "\n".join(out) + "\n"
