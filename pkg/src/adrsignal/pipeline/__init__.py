from .config import (
    DiscoverSection,
    PathsSection,
    PipelineConfig,
    SplitSection,
    TrainSection,
    config_hash,
    load_pipeline_config,
)
from .stages import STAGES, PipelineRun, evaluate_predictions, job_name, report, run_stage

__all__ = [
    "DiscoverSection",
    "PathsSection",
    "PipelineConfig",
    "SplitSection",
    "TrainSection",
    "config_hash",
    "load_pipeline_config",
    "STAGES",
    "PipelineRun",
    "evaluate_predictions",
    "job_name",
    "report",
    "run_stage",
]
