import datetime as dt
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

ROOT = Path(__file__).resolve().parent.parent
SRC = ROOT / "src"
sys.path.insert(0, str(SRC))
sys.path.insert(0, str(ROOT))

from adrsignal.claims.models import PatientRecord, Visit  # noqa: E402
from adrsignal.graph.builder import DrugDiseaseGraph, EdgePartition, PartitionKind  # noqa: E402
from adrsignal.labels.split import LabeledPairSet  # noqa: E402


def visit(patient, day, rx=(), dx=()):
    return Visit(
        patient_id=patient,
        date=dt.date(2020, 1, day),
        prescriptions=frozenset(rx),
        diagnoses=frozenset(dx),
    )


def record(patient, *visits):
    return PatientRecord(patient_id=patient, visits=tuple(visits))


def random_graph(
    seed: int,
    n_drug: int = 10,
    n_dis: int = 10,
    fd: int = 5,
    fs: int = 4,
    density: float = 0.3,
) -> DrugDiseaseGraph:
    """Random weighted drug-disease graph with dense features for model tests."""
    rng = np.random.default_rng(seed)

    def homogeneous(n, kind):
        edges = [
            (i, j, float(rng.uniform(0.1, 1.0)))
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < density
        ]
        return EdgePartition(kind, edges)

    hetero = [
        (i, j, float(rng.uniform(0.05, 1.0)))
        for i in range(n_drug)
        for j in range(n_dis)
        if rng.random() < density
    ]
    return DrugDiseaseGraph(
        n_drug=n_drug,
        n_dis=n_dis,
        partitions={
            PartitionKind.DRUG_DRUG: homogeneous(n_drug, PartitionKind.DRUG_DRUG),
            PartitionKind.DIS_DIS: homogeneous(n_dis, PartitionKind.DIS_DIS),
            PartitionKind.DRUG_DIS: EdgePartition(PartitionKind.DRUG_DIS, hetero),
        },
        features_drug=rng.normal(size=(n_drug, fd)),
        features_dis=rng.normal(size=(n_dis, fs)),
        drug_codes=tuple(f"A{10 + i // 10:02d}B{'ABCDEFGHIJ'[i % 10]}01" for i in range(n_drug)),
        dis_codes=tuple(f"{'ABCDEFGHIJKLMNOPQRSTUVWXYZ'[j % 26]}{10 + j // 26:02d}" for j in range(n_dis)),
        embedding_dim=fd,
    )


@pytest.fixture
def tiny_records():
    return [
        record("p2", visit("p2", 3, rx={"C03CA01"}, dx={"I50"}), visit("p2", 9, rx={"C03CA01", "A01AB02"}, dx={"E11.9"})),
        record("p1", visit("p1", 1, rx={"A01AB02", "C03CA01"}, dx={"I50", "E11"}), visit("p1", 4, rx={"N02BE01"})),
        record("p3", visit("p3", 2, dx={"I51"}), visit("p3", 5, rx={"N02BE01"}, dx={"I50"})),
    ]


@pytest.fixture
def small_graph():
    return random_graph(seed=3)


def grid_pairs(graph: DrugDiseaseGraph) -> LabeledPairSet:
    """Every drug-disease pair of a ``random_graph``, split by disease id (6/2/2 of 10)."""
    rows = []
    for i in range(graph.n_drug):
        for j in range(graph.n_dis):
            positive = (i + j) % 3 == 0
            frequency = ("rare" if i % 2 == 0 else "common") if positive else ""
            split = "train" if j < 0.6 * graph.n_dis else "val" if j < 0.8 * graph.n_dis else "test"
            rows.append((i, j, int(positive), frequency, graph.drug_codes[i], graph.dis_codes[j], split))
    frame = pd.DataFrame(
        rows, columns=["drug_id", "dis_id", "label", "frequency", "drug_code", "icd10_code", "split"]
    )
    return LabeledPairSet(frame)


@pytest.fixture
def small_pairs(small_graph):
    return grid_pairs(small_graph)
