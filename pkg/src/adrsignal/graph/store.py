"""Graph files: one ``i j w`` edge list per partition, feature matrices, JSON manifest."""

import io
import json
from pathlib import Path

import numpy as np

from adrsignal.errors import MalformedInputError
from adrsignal.graph.builder import DrugDiseaseGraph, EdgePartition, PartitionKind
from helpers.saver import atomic_write_bytes


MANIFEST = "graph.json"


def _edge_text(part: EdgePartition) -> str:
    return "".join(f"{i} {j} {w:.9g}\n" for i, j, w in part.edges)


def _npy_bytes(arr: np.ndarray) -> bytes:
    buf = io.BytesIO()
    np.save(buf, np.ascontiguousarray(arr, dtype=np.float64), allow_pickle=False)
    return buf.getvalue()


def save_graph(graph: DrugDiseaseGraph, directory, config_echo: dict) -> str:
    directory = Path(directory)
    files = {}
    for kind in PartitionKind:
        name = f"edges_{kind.value}.txt"
        atomic_write_bytes(directory / name, _edge_text(graph.partitions[kind]).encode("ascii"))
        files[kind.value] = name
    atomic_write_bytes(directory / "features_drug.npy", _npy_bytes(graph.features_drug))
    atomic_write_bytes(directory / "features_dis.npy", _npy_bytes(graph.features_dis))
    atomic_write_bytes(directory / "codes_drug.txt", "".join(f"{c}\n" for c in graph.drug_codes).encode("utf-8"))
    atomic_write_bytes(directory / "codes_dis.txt", "".join(f"{c}\n" for c in graph.dis_codes).encode("utf-8"))
    manifest = {
        "n_drug": graph.n_drug,
        "n_dis": graph.n_dis,
        "embedding_dim": graph.embedding_dim,
        "edge_files": files,
        "feature_files": {"drug": "features_drug.npy", "disease": "features_dis.npy"},
        "code_files": {"drug": "codes_drug.txt", "disease": "codes_dis.txt"},
        "resolved": graph.resolved,
        "config": config_echo,
    }
    text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    return atomic_write_bytes(directory / MANIFEST, text.encode("utf-8"))


def _read_edges(path: Path, kind: PartitionKind) -> EdgePartition:
    edges = []
    for n, line in enumerate(path.read_text(encoding="ascii").splitlines(), start=1):
        parts = line.split()
        if len(parts) != 3:
            raise MalformedInputError(f"bad edge line {n} in {path}")
        edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
    return EdgePartition(kind, edges)


def load_graph(directory) -> DrugDiseaseGraph:
    directory = Path(directory)
    manifest = json.loads((directory / MANIFEST).read_text(encoding="utf-8"))
    partitions = {
        kind: _read_edges(directory / manifest["edge_files"][kind.value], kind) for kind in PartitionKind
    }
    features_drug = np.load(directory / manifest["feature_files"]["drug"], allow_pickle=False)
    features_dis = np.load(directory / manifest["feature_files"]["disease"], allow_pickle=False)
    drug_codes = tuple((directory / manifest["code_files"]["drug"]).read_text(encoding="utf-8").split())
    dis_codes = tuple((directory / manifest["code_files"]["disease"]).read_text(encoding="utf-8").split())
    if features_drug.shape[0] != manifest["n_drug"] or features_dis.shape[0] != manifest["n_dis"]:
        raise MalformedInputError(f"feature rows disagree with node counts in {directory}")
    return DrugDiseaseGraph(
        n_drug=manifest["n_drug"],
        n_dis=manifest["n_dis"],
        partitions=partitions,
        features_drug=features_drug,
        features_dis=features_dis,
        drug_codes=drug_codes,
        dis_codes=dis_codes,
        embedding_dim=manifest["embedding_dim"],
        resolved=manifest["resolved"],
    )
