"""Pipeline configuration: one validated pydantic tree, loaded from TOML with flag overrides."""

import hashlib
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from adrsignal.errors import ConfigError, UnreadableFileError
from adrsignal.evaluation.discovery import CANDIDATE_THRESHOLD, SCOPES
from adrsignal.evaluation.trainer import ModelKind, TrainConfig
from adrsignal.embedding.skipgram import SkipgramConfig
from adrsignal.gnn.config import GnnConfig
from adrsignal.graph.builder import GraphConfig, SparsityProfile
from adrsignal.labels.split import DEFAULT_RATIOS
from adrsignal.synth.generator import SynthConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class TrainSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    models: Tuple[ModelKind, ...] = tuple(ModelKind)
    profiles: Tuple[SparsityProfile, ...] = (SparsityProfile.LOW, SparsityProfile.HIGH)
    # LR and NN are trained on this profile's graph only
    baseline_profile: SparsityProfile = SparsityProfile.LOW
    seeds: int = Field(1, ge=1)
    epochs: int = Field(200, ge=1)
    learning_rate: float = Field(1e-3, gt=0)
    early_stop_patience: int = Field(10, ge=1)
    lr_l2: float = Field(1e-4, gt=0)
    nn_hidden: int = Field(300, ge=1)

    @field_validator("models", "profiles")
    @classmethod
    def _non_empty(cls, value):
        if not value:
            raise ValueError("must name at least one entry")
        return tuple(dict.fromkeys(value))

    def jobs(self, base_seed: int) -> List[TrainConfig]:
        """Every (model, profile, seed) job, baselines restricted to ``baseline_profile``."""
        out = []
        for profile in self.profiles:
            for model in self.models:
                if not model.is_graph and profile is not self.baseline_profile:
                    continue
                for seed in range(base_seed, base_seed + self.seeds):
                    out.append(
                        TrainConfig(
                            model=model,
                            sparsity_profile=profile,
                            epochs=self.epochs,
                            learning_rate=self.learning_rate,
                            early_stop_patience=self.early_stop_patience,
                            seed=seed,
                            lr_l2=self.lr_l2,
                            nn_hidden=self.nn_hidden,
                        )
                    )
        return out


class SplitSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    ratios: Tuple[float, float, float] = DEFAULT_RATIOS

    @field_validator("ratios")
    @classmethod
    def _ratios(cls, value):
        if any(r < 0 for r in value) or abs(sum(value) - 1.0) > 1e-9:
            raise ValueError(f"split ratios must be non-negative and sum to 1, got {value}")
        return value


class DiscoverSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    model: ModelKind = ModelKind.GCN
    profile: SparsityProfile = SparsityProfile.LOW
    threshold: float = Field(CANDIDATE_THRESHOLD, ge=0, le=1)
    scope: str = "test"

    @field_validator("model")
    @classmethod
    def _graph_model(cls, value):
        if not ModelKind(value).is_graph:
            raise ValueError("candidates are mined with a graph model")
        return value

    @field_validator("scope")
    @classmethod
    def _scope(cls, value):
        if value not in SCOPES:
            raise ValueError(f"scope must be one of {SCOPES}")
        return value


class PathsSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    # external inputs; when unset the synth stage output is used
    claims: Optional[Path] = None
    claims_format: str = "csv"
    labels: Optional[Path] = None
    out: Path = Path("data/runs/default")

    @field_validator("claims_format")
    @classmethod
    def _format(cls, value):
        if value not in ("csv", "jsonl"):
            raise ValueError("claims_format must be csv or jsonl")
        return value


class PipelineConfig(BaseModel):
    """
    Every knob of a pipeline run. ``seed`` seeds generation, embeddings and
    the split; training jobs use ``seed`` .. ``seed + train.seeds - 1``.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = Field(0, ge=0)
    synth: SynthConfig = SynthConfig()
    skipgram: SkipgramConfig = SkipgramConfig()
    graph: GraphConfig = GraphConfig()
    gnn: GnnConfig = GnnConfig()
    train: TrainSection = TrainSection()
    split: SplitSection = SplitSection()
    discover: DiscoverSection = DiscoverSection()
    paths: PathsSection = PathsSection()

    @model_validator(mode="after")
    def _discover_trained(self):
        if self.discover.profile not in self.train.profiles:
            raise ValueError(f"discover.profile {self.discover.profile.value} is not among train.profiles")
        return self

    def seeded(self) -> "PipelineConfig":
        """Copy with the run seed pushed into every seeded section."""
        return self.model_copy(
            update={
                "synth": self.synth.model_copy(update={"seed": self.seed}),
                "skipgram": self.skipgram.model_copy(update={"seed": self.seed}),
                "gnn": self.gnn.model_copy(update={"seed": self.seed}),
            }
        )


def _deep_merge(base: Dict[str, Any], extra: Mapping[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for key, value in extra.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), Mapping):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def read_toml(path) -> Dict[str, Any]:
    path = Path(path)
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except OSError as exc:
        raise UnreadableFileError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc


def load_pipeline_config(path=None, overrides: Optional[Mapping[str, Any]] = None) -> PipelineConfig:
    """
    Validate the config file (or defaults) with nested ``overrides`` applied on top.

    Overrides use the file's shape, e.g. ``{"train": {"models": ["gcn"]}}``.
    """
    data = read_toml(path) if path is not None else {}
    if overrides:
        data = _deep_merge(data, overrides)
    try:
        return PipelineConfig.model_validate(data).seeded()
    except ValidationError as exc:
        raise ConfigError(f"invalid pipeline config: {exc}") from exc


def config_hash(config: PipelineConfig) -> str:
    """SHA-256 of the canonical JSON dump of a validated config."""
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
