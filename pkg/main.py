"""Command-line entry point for the adrsignal pipeline."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

# Ensure src/ is on sys.path for local development
BASE_DIR = Path(__file__).resolve().parent
SRC_DIR = BASE_DIR / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

from config import Config
from helpers.logger import setup_logger
from adrsignal.errors import AdrSignalError, ValidationFailure
from adrsignal.evaluation.trainer import ModelKind
from adrsignal.pipeline import STAGES, load_pipeline_config, run_stage
from adrsignal.utils.metrics import latest_metrics

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def initialize() -> logging.Logger:
    """Initializes the application (directories, logger, etc.)."""
    Config.ensure_directories()

    logger = setup_logger(
        name="adrsignal",
        log_file=Config.LOG_FILE or None,
        level=getattr(logging, Config.LOG_LEVEL, logging.INFO),
    )
    logger.debug("Data directory: %s", Config.DATA_DIR)
    return logger


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adrsignal",
        description="adrsignal: adverse drug reaction signal detection on claims data",
    )
    parser.add_argument("stage", choices=STAGES + ("all",), help="Pipeline stage to run")
    parser.add_argument("--config", help="Pipeline config file (TOML)")
    parser.add_argument("--seed", type=int, help="Run seed (overrides the config file)")
    parser.add_argument("--seeds", type=int, help="Number of consecutive training seeds")
    parser.add_argument("--profile", choices=["low", "high"], help="Train and mine on this sparsity profile only")
    parser.add_argument("--model", choices=[m.value for m in ModelKind], help="Train this model only")
    parser.add_argument("--out", help="Run directory")
    return parser


def overrides_from_args(args: argparse.Namespace) -> dict:
    """Nested config overrides for the flags that were given."""
    out: dict = {}
    if args.seed is not None:
        out["seed"] = args.seed
    train: dict = {}
    if args.seeds is not None:
        train["seeds"] = args.seeds
    if args.profile is not None:
        train["profiles"] = [args.profile]
        train["baseline_profile"] = args.profile
        out["discover"] = {"profile": args.profile}
    if args.model is not None:
        train["models"] = [args.model]
        if ModelKind(args.model).is_graph:
            out.setdefault("discover", {})["model"] = args.model
    if train:
        out["train"] = train
    if args.out is not None:
        out["paths"] = {"out": args.out}
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logger = initialize()
    config_path = args.config or Config.PIPELINE_CONFIG or None
    overrides = overrides_from_args(args)
    if not config_path:
        if args.seed is None:
            overrides["seed"] = Config.DEFAULT_SEED
        if args.out is None:
            overrides["paths"] = {"out": str(Config.RUNS_DIR / "default")}

    try:
        config = load_pipeline_config(config_path, overrides)
        written = run_stage(args.stage, config)
    except ValidationFailure as exc:
        logger.error("%s", exc, extra={"event": "cli", "stage": args.stage})
        return EXIT_VALIDATION
    except AdrSignalError as exc:
        logger.error("%s", exc, extra={"event": "cli", "stage": args.stage})
        return EXIT_RUNTIME
    except Exception as exc:
        logger.exception("Unexpected failure in stage %s: %s", args.stage, exc, extra={"event": "cli"})
        return EXIT_RUNTIME

    if Config.METRICS_FILE:
        metrics_path = Path(Config.METRICS_FILE)
        metrics_path.parent.mkdir(parents=True, exist_ok=True)
        metrics_path.write_bytes(latest_metrics())

    if "report" in written:
        table = Path(config.paths.out) / "report" / "report.txt"
        sys.stdout.write(table.read_text(encoding="utf-8"))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
