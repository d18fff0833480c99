from .baselines import (
    N_NEIGHBORS,
    NN_HIDDEN,
    LogisticBaseline,
    NeighborFeatures,
    PairMlp,
    baseline_lr_features,
    baseline_nn_score,
    nn_scores,
)
from .discovery import (
    CANDIDATE_COLUMNS,
    CANDIDATE_THRESHOLD,
    CandidatePair,
    candidates_frame,
    discover_candidates,
    evaluate_rare,
    rare_accuracy,
)
from .metrics import MetricError, auprc, auroc, confidence_interval
from .report import EvalReport, ReportRow, RunResult, build_report, format_table, frequency_hits
from .trainer import (
    ModelKind,
    TrainConfig,
    TrainedModel,
    build_module,
    evaluate_split,
    load_trained,
    save_trained,
    train_model,
)

__all__ = [
    "N_NEIGHBORS",
    "NN_HIDDEN",
    "LogisticBaseline",
    "NeighborFeatures",
    "PairMlp",
    "baseline_lr_features",
    "baseline_nn_score",
    "nn_scores",
    "CANDIDATE_COLUMNS",
    "CANDIDATE_THRESHOLD",
    "CandidatePair",
    "candidates_frame",
    "discover_candidates",
    "evaluate_rare",
    "rare_accuracy",
    "MetricError",
    "auprc",
    "auroc",
    "confidence_interval",
    "EvalReport",
    "ReportRow",
    "RunResult",
    "build_report",
    "format_table",
    "frequency_hits",
    "ModelKind",
    "TrainConfig",
    "TrainedModel",
    "build_module",
    "evaluate_split",
    "load_trained",
    "save_trained",
    "train_model",
]
