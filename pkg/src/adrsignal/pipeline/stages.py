"""
Stage runner. Every stage reads its upstream artifacts from the run
directory, checks them against the upstream manifest and writes its own
outputs atomically followed by a ``manifest.json``.

Run directory layout::

    synth/     claims.csv labels.tsv rules.json
    ingest/    records.jsonl vocab_drug.txt vocab_dis.txt ingest_report.json
    embed/     drug.emb disease.emb (+ .codes.txt sidecars)
    graph/     pairs.csv <profile>/{edge lists, features, graph.json, stats.json}
    train/     <model>-<profile>-s<seed>/{model.ckpt, history.json, predictions.csv}
    eval/      results.json
    discover/  candidates.csv
    report/    report.json report.txt candidates.csv
"""

import json
import logging
import platform
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd
import sklearn
import torch

import adrsignal
from adrsignal.claims.ingest import ingest_claims, read_claims
from adrsignal.claims.models import CodeKind, PatientRecord
from adrsignal.claims.vocabulary import build_corpus, build_vocabularies
from adrsignal.embedding.skipgram import train_embeddings
from adrsignal.embedding.store import load_embeddings, save_embeddings
from adrsignal.errors import AdrSignalError, ConfigError, MissingArtifactError, StaleArtifactError
from adrsignal.evaluation.discovery import CANDIDATE_COLUMNS, candidates_frame, discover_candidates
from adrsignal.evaluation.metrics import MetricError, auprc, auroc
from adrsignal.evaluation.report import EvalReport, RunResult, build_report, format_table, frequency_hits
from adrsignal.evaluation.trainer import ModelKind, TrainConfig, load_trained, save_trained, train_model
from adrsignal.graph.builder import DrugDiseaseGraph, build_graph, graph_stats
from adrsignal.graph.store import load_graph, save_graph
from adrsignal.hierarchy.codes import CategoryEncoder
from adrsignal.labels.sider import load_labels
from adrsignal.labels.split import LabeledPairSet, build_labeled_set, pairs_from_csv
from adrsignal.pipeline.config import PipelineConfig, config_hash
from adrsignal.synth.generator import CLAIMS_FILE, LABELS_FILE, generate_corpus
from adrsignal.utils.metrics import stage_duration_seconds
from helpers.saver import DataSaver, sha256_file


log = logging.getLogger("adrsignal")

STAGES = ("synth", "ingest", "embed", "graph", "train", "eval", "discover", "report")
MANIFEST = "manifest.json"
PREDICTION_COLUMNS = ["drug_code", "icd10_code", "label", "frequency", "split", "score"]


def library_versions() -> Dict[str, str]:
    return {
        "adrsignal": adrsignal.__version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "pandas": pd.__version__,
        "scikit-learn": sklearn.__version__,
        "torch": torch.__version__,
    }


def job_name(config: TrainConfig) -> str:
    return f"{config.model.value}-{config.sparsity_profile.value}-s{config.seed}"


class PipelineRun:
    """One run directory and the validated config that drives it."""

    def __init__(self, config: PipelineConfig, out_dir=None):
        self.config = config.seeded()
        self.root = Path(out_dir) if out_dir is not None else Path(self.config.paths.out)
        self.config_hash = config_hash(self.config)

    def stage_dir(self, stage: str) -> Path:
        return self.root / stage

    def saver(self, stage: str) -> DataSaver:
        return DataSaver(self.stage_dir(stage))

    def rel(self, path) -> str:
        path = Path(path)
        try:
            return path.resolve().relative_to(self.root.resolve()).as_posix()
        except ValueError:
            return str(path)

    def manifest(self, stage: str) -> Optional[dict]:
        path = self.stage_dir(stage) / MANIFEST
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def require(self, upstream: str, stage: str) -> dict:
        """Upstream manifest after checking every file it lists is unchanged."""
        manifest = self.manifest(upstream)
        if manifest is None:
            raise MissingArtifactError(f"{upstream}/{MANIFEST}", stage)
        for rel, digest in manifest["outputs"].items():
            path = self.root / rel
            if not path.exists():
                raise MissingArtifactError(rel, stage)
            if sha256_file(path) != digest:
                raise StaleArtifactError(rel, stage)
        if manifest.get("config_hash") != self.config_hash:
            log.warning(
                "%s artifacts were produced under a different config",
                upstream,
                extra={"event": "manifest", "stage": stage},
            )
        return manifest

    def write_manifest(self, stage: str, inputs: Iterable, outputs: Iterable, **extra) -> str:
        data = {
            "stage": stage,
            "config_hash": self.config_hash,
            "seed": self.config.seed,
            "inputs": {self.rel(p): sha256_file(p) for p in sorted(set(map(str, inputs)))},
            "outputs": {self.rel(p): sha256_file(p) for p in sorted(set(map(str, outputs)))},
            "versions": library_versions(),
        }
        data.update(extra)
        return self.saver(stage).save_json(data, MANIFEST)

    # upstream readers

    def claims_input(self, stage: str) -> Path:
        if self.config.paths.claims is not None:
            return Path(self.config.paths.claims)
        self.require("synth", stage)
        return self.stage_dir("synth") / CLAIMS_FILE

    def labels_input(self, stage: str) -> Path:
        if self.config.paths.labels is not None:
            return Path(self.config.paths.labels)
        self.require("synth", stage)
        return self.stage_dir("synth") / LABELS_FILE

    def records(self, stage: str) -> List[PatientRecord]:
        self.require("ingest", stage)
        return ingest_claims(self.stage_dir("ingest") / "records.jsonl", "jsonl")

    def graph(self, profile: str) -> DrugDiseaseGraph:
        return load_graph(self.stage_dir("graph") / profile)

    def labeled(self, graph: DrugDiseaseGraph) -> LabeledPairSet:
        return pairs_from_csv(self.stage_dir("graph") / "pairs.csv", graph.drug_codes, graph.dis_codes)


def run_synth(run: PipelineRun) -> List[str]:
    corpus = generate_corpus(run.config.synth)
    outputs = list(corpus.write(run.stage_dir("synth")).values())
    run.write_manifest("synth", [], outputs, rules=len(corpus.rules))
    return outputs


def run_ingest(run: PipelineRun) -> List[str]:
    source = run.claims_input("ingest")
    records, report = read_claims(source, run.config.paths.claims_format)
    drug_vocab, dis_vocab = build_vocabularies(records)
    saver = run.saver("ingest")
    lines = [
        json.dumps(
            {
                "patient_id": record.patient_id,
                "date": visit.date.isoformat(),
                "rx": sorted(visit.prescriptions),
                "dx": sorted(visit.diagnoses),
            },
            sort_keys=True,
        )
        for record in records
        for visit in record.visits
    ]
    outputs = [
        saver.save_text("".join(line + "\n" for line in lines), "records.jsonl"),
        saver.save_text("".join(c + "\n" for c in drug_vocab.id_to_code), "vocab_drug.txt"),
        saver.save_text("".join(c + "\n" for c in dis_vocab.id_to_code), "vocab_dis.txt"),
        saver.save_json(report.to_dict(), "ingest_report.json"),
    ]
    run.write_manifest("ingest", [source], outputs, patients=len(records))
    return outputs


def run_embed(run: PipelineRun) -> List[str]:
    records = run.records("embed")
    vocabs = build_vocabularies(records)
    directory = run.stage_dir("embed")
    outputs = []
    losses = {}
    for vocab, name in zip(vocabs, ("drug", "disease")):
        table = train_embeddings(build_corpus(records, vocab), run.config.skipgram, vocab)
        outputs.extend(save_embeddings(table, directory / f"{name}.emb"))
        losses[name] = list(table.epoch_losses)
    outputs.append(run.saver("embed").save_json(losses, "losses.json"))
    run.write_manifest("embed", [run.stage_dir("ingest") / "records.jsonl"], outputs)
    return outputs


def run_graph(run: PipelineRun) -> List[str]:
    records = run.records("graph")
    run.require("embed", "graph")
    drug_table = load_embeddings(run.stage_dir("embed") / "drug.emb")
    dis_table = load_embeddings(run.stage_dir("embed") / "disease.emb")
    encoders = (
        CategoryEncoder.fit(CodeKind.DRUG, drug_table.codes),
        CategoryEncoder.fit(CodeKind.DISEASE, dis_table.codes),
    )
    labels_path = run.labels_input("graph")
    labeled = build_labeled_set(
        load_labels(labels_path), drug_table.codes, dis_table.codes, run.config.seed, run.config.split.ratios
    )
    saver = run.saver("graph")
    outputs = [saver.save_csv(labeled.to_csv_frame(), "pairs.csv")]

    for profile in run.config.train.profiles:
        graph_config = run.config.graph.model_copy(update={"sparsity_profile": profile})
        graph = build_graph((drug_table, dis_table), encoders, records, graph_config)
        directory = run.stage_dir("graph") / profile.value
        save_graph(graph, directory, graph_config.model_dump(mode="json"))
        stats = graph_stats(graph, labeled)
        DataSaver(directory).save_json(stats, "stats.json")
        outputs.extend(str(p) for p in sorted(directory.iterdir()) if p.is_file() and not p.name.startswith("."))

    inputs = [run.stage_dir("embed") / "drug.emb", run.stage_dir("embed") / "disease.emb", labels_path]
    run.write_manifest("graph", inputs, outputs, encoders=[e.to_dict() for e in encoders])
    return outputs


def _predictions(trained, labeled: LabeledPairSet) -> pd.DataFrame:
    frame = labeled.frame.copy()
    frame["score"] = trained.predict_frame(frame)
    return frame[PREDICTION_COLUMNS]


def run_train(run: PipelineRun) -> List[str]:
    run.require("graph", "train")
    torch.use_deterministic_algorithms(True, warn_only=True)
    graphs: Dict[str, DrugDiseaseGraph] = {}
    outputs = []
    jobs = []
    for job in run.config.train.jobs(run.config.seed):
        profile = job.sparsity_profile.value
        if profile not in graphs:
            graphs[profile] = run.graph(profile)
        graph = graphs[profile]
        labeled = run.labeled(graph)
        with stage_duration_seconds.labels(stage=f"train_{job.model.value}").time():
            trained = train_model(job, graph, labeled, run.config.gnn)
        name = job_name(job)
        saver = run.saver(f"train/{name}")
        outputs.append(save_trained(trained, saver.path("model.ckpt")))
        outputs.append(saver.save_json({"best_epoch": trained.best_epoch, "epochs": trained.history}, "history.json"))
        outputs.append(saver.save_csv(_predictions(trained, labeled), "predictions.csv"))
        jobs.append(name)

    # jobs from earlier invocations stay listed while their files are intact
    previous = run.manifest("train") or {}
    kept = {}
    for rel, digest in previous.get("outputs", {}).items():
        path = run.root / rel
        job = Path(rel).parent.name
        if job not in jobs and path.exists() and sha256_file(path) == digest:
            kept[job] = True
            outputs.append(str(path))
    all_jobs = sorted(set(jobs) | set(kept))
    inputs = [run.stage_dir("graph") / "pairs.csv"]
    run.write_manifest("train", inputs, outputs, jobs=all_jobs)
    return outputs


def evaluate_predictions(predictions: pd.DataFrame, model: str, profile: str, seed: int, best_epoch: int = 0) -> RunResult:
    test = predictions[predictions["split"] == "test"]
    scores = test["score"].to_numpy(dtype=np.float64)
    labels = test["label"].to_numpy(dtype=np.int64)
    metrics = {}
    for name, fn in (("auroc", auroc), ("auprc", auprc)):
        try:
            metrics[name] = fn(scores, labels)
        except MetricError:
            metrics[name] = None
    return RunResult(
        model=model,
        profile=profile,
        seed=seed,
        auroc=metrics["auroc"],
        auprc=metrics["auprc"],
        frequency_hits=frequency_hits(scores, test),
        best_epoch=best_epoch,
    )


def run_eval(run: PipelineRun) -> List[str]:
    manifest = run.require("train", "eval")
    if not manifest.get("jobs"):
        raise MissingArtifactError("train/<model>-<profile>-s<seed>", "eval")
    results = []
    inputs = []
    for name in manifest["jobs"]:
        model, profile, seed = name.rsplit("-", 2)
        job_dir = run.stage_dir("train") / name
        predictions = pd.read_csv(job_dir / "predictions.csv", dtype={"frequency": str}, keep_default_na=False)
        history = json.loads((job_dir / "history.json").read_text(encoding="utf-8"))
        best = int(history.get("best_epoch", 0))
        results.append(evaluate_predictions(predictions, model, profile, int(seed[1:]), best))
        inputs.append(job_dir / "predictions.csv")
    results.sort(key=lambda r: r.key)
    outputs = [run.saver("eval").save_json([r.to_dict() for r in results], "results.json")]
    run.write_manifest("eval", inputs, outputs)
    return outputs


def run_discover(run: PipelineRun) -> List[str]:
    manifest = run.require("train", "discover")
    section = run.config.discover
    gnn_job = f"{section.model.value}-{section.profile.value}-s{run.config.seed}"
    nn_job = f"{ModelKind.NN.value}-{run.config.train.baseline_profile.value}-s{run.config.seed}"
    for job in (gnn_job, nn_job):
        if job not in manifest.get("jobs", []):
            raise MissingArtifactError(f"train/{job}/model.ckpt", "discover")

    graph = run.graph(section.profile.value)
    labeled = run.labeled(graph)
    gnn = load_trained(run.stage_dir("train") / gnn_job / "model.ckpt", graph)
    nn = load_trained(run.stage_dir("train") / nn_job / "model.ckpt", graph)
    candidates = discover_candidates(gnn, nn, labeled, section.threshold, section.scope)
    outputs = [run.saver("discover").save_csv(candidates_frame(candidates), "candidates.csv")]
    inputs = [run.stage_dir("train") / job / "model.ckpt" for job in (gnn_job, nn_job)]
    run.write_manifest("discover", inputs, outputs, count=len(candidates))
    return outputs


def report(run_dir) -> Tuple[EvalReport, pd.DataFrame]:
    """
    Consolidated comparison table and candidate list, computed only from
    the artifacts already in ``run_dir``.
    """
    root = Path(run_dir)
    results_path = root / "eval" / "results.json"
    if not results_path.exists():
        raise MissingArtifactError("eval/results.json", "report")
    results = [RunResult.from_dict(r) for r in json.loads(results_path.read_text(encoding="utf-8"))]
    if not results:
        raise MissingArtifactError("completed evaluation runs", "report")
    pairs_path = root / "graph" / "pairs.csv"
    labeled = None
    if pairs_path.exists():
        labeled = LabeledPairSet(pd.read_csv(pairs_path, dtype=str, keep_default_na=False).astype({"label": int}))
    evaluation = build_report(results, labeled)

    candidates_path = root / "discover" / "candidates.csv"
    if candidates_path.exists():
        candidates = pd.read_csv(candidates_path, dtype={"drug_code": str, "icd10_code": str})
    else:
        candidates = pd.DataFrame(columns=CANDIDATE_COLUMNS)
    return evaluation, candidates


def run_report(run: PipelineRun) -> List[str]:
    run.require("eval", "report")
    if run.manifest("discover") is not None:
        run.require("discover", "report")
    evaluation, candidates = report(run.root)
    saver = run.saver("report")
    table = format_table(evaluation)
    outputs = [
        saver.save_json(evaluation.to_dict(), "report.json"),
        saver.save_text(table, "report.txt"),
        saver.save_csv(candidates, "candidates.csv"),
    ]
    inputs = [run.stage_dir("eval") / "results.json"]
    if (run.stage_dir("discover") / "candidates.csv").exists():
        inputs.append(run.stage_dir("discover") / "candidates.csv")
    run.write_manifest("report", inputs, outputs)
    return outputs


RUNNERS = {
    "synth": run_synth,
    "ingest": run_ingest,
    "embed": run_embed,
    "graph": run_graph,
    "train": run_train,
    "eval": run_eval,
    "discover": run_discover,
    "report": run_report,
}


def _discover_ready(config: PipelineConfig) -> bool:
    models = set(config.train.models)
    return config.discover.model in models and ModelKind.NN in models


def run_stage(stage: str, config: PipelineConfig, out_dir=None) -> Dict[str, List[str]]:
    """
    Run one stage (or ``all`` in order) against the run directory and
    return the written paths per stage.
    """
    if stage != "all" and stage not in RUNNERS:
        raise ConfigError(f"unknown stage {stage!r}; expected one of {STAGES + ('all',)}")
    run = PipelineRun(config, out_dir)
    if stage == "all":
        order = [s for s in STAGES if not (s == "synth" and run.config.paths.claims is not None)]
        if not _discover_ready(run.config):
            log.warning("skipping discover: GNN or NN baseline not trained", extra={"event": "pipeline"})
            order.remove("discover")
    else:
        order = [stage]

    written: Dict[str, List[str]] = {}
    for name in order:
        log.info("stage_start", extra={"event": "pipeline", "stage": name, "path": str(run.root)})
        try:
            with stage_duration_seconds.labels(stage=name).time():
                written[name] = RUNNERS[name](run)
        except AdrSignalError:
            log.error("stage_failed", extra={"event": "pipeline", "stage": name})
            raise
        log.info("stage_done", extra={"event": "pipeline", "stage": name, "count": len(written[name])})
    return written
