import numpy as np
import pandas as pd
import pytest

from adrsignal.errors import ConfigError
from adrsignal.evaluation import (
    CANDIDATE_COLUMNS,
    RunResult,
    build_report,
    candidates_frame,
    discover_candidates,
    evaluate_rare,
    format_table,
    frequency_hits,
    rare_accuracy,
)
from adrsignal.evaluation.discovery import CandidatePair


class TableModel:
    """Scores looked up from a dense (drug, disease) table."""

    def __init__(self, graph, table):
        self.graph = graph
        self.table = np.asarray(table, dtype=np.float64)

    def predict(self, drugs, diseases):
        return self.table[np.asarray(drugs), np.asarray(diseases)]

    def predict_frame(self, frame):
        return self.predict(frame["drug_id"].to_numpy(), frame["dis_id"].to_numpy())


def test_rare_accuracy():
    assert rare_accuracy([0.9, 0.9, 0.9]) == 1.0
    assert rare_accuracy([0.1, 0.1]) == 0.0
    assert rare_accuracy([0.9, 0.5]) == 0.5
    assert rare_accuracy([]) is None


def test_evaluate_rare(small_graph, small_pairs):
    high = TableModel(small_graph, np.full((10, 10), 0.9))
    low = TableModel(small_graph, np.full((10, 10), 0.1))
    assert evaluate_rare(high, small_pairs) == 1.0
    assert evaluate_rare(low, small_pairs) == 0.0

    frame = small_pairs.frame.copy()
    frame.loc[frame["frequency"] == "rare", "frequency"] = "common"
    small_pairs.frame = frame
    assert evaluate_rare(high, small_pairs) is None


def test_discovery_rule(small_graph, small_pairs):
    rng = np.random.default_rng(1)
    gnn_table = rng.uniform(0.9, 1.0, size=(10, 10))
    nn_table = rng.uniform(0.0, 1.0, size=(10, 10))
    gnn, nn = TableModel(small_graph, gnn_table), TableModel(small_graph, nn_table)

    found = discover_candidates(gnn, nn, small_pairs, threshold=0.97, scope="test")

    test = small_pairs.subset("test")
    expected = {
        (small_graph.drug_codes[i], small_graph.dis_codes[j])
        for i, j, y in zip(test["drug_id"], test["dis_id"], test["label"])
        if y == 0 and gnn_table[i, j] > 0.97 and nn_table[i, j] <= 0.5
    }
    assert {(c.drug_code, c.icd10_code) for c in found} == expected
    probs = [c.gnn_prob for c in found]
    assert probs == sorted(probs, reverse=True)
    assert all(c.gnn_prob > 0.97 and c.nn_prob <= 0.5 for c in found)


def test_nn_exclusion(small_graph, small_pairs):
    gnn_table = np.full((10, 10), 0.98)
    nn_table = np.full((10, 10), 0.3)
    nn_table[2, 8] = 0.9
    found = discover_candidates(TableModel(small_graph, gnn_table), TableModel(small_graph, nn_table), small_pairs)
    pairs = {(c.drug_code, c.icd10_code) for c in found}
    # drug 2 / disease 8 is a test negative
    assert (small_graph.drug_codes[2], small_graph.dis_codes[8]) not in pairs
    assert (small_graph.drug_codes[0], small_graph.dis_codes[8]) in pairs


def test_scopes(small_graph, small_pairs):
    gnn = TableModel(small_graph, np.full((10, 10), 0.99))
    nn = TableModel(small_graph, np.zeros((10, 10)))
    negatives = int((small_pairs.frame["label"] == 0).sum())
    test_negatives = int((small_pairs.subset("test")["label"] == 0).sum())
    assert len(discover_candidates(gnn, nn, small_pairs, scope="test")) == test_negatives
    assert len(discover_candidates(gnn, nn, small_pairs, scope="labeled")) == negatives
    assert len(discover_candidates(gnn, nn, small_pairs, scope="all")) == negatives
    with pytest.raises(ConfigError):
        discover_candidates(gnn, nn, small_pairs, scope="everything")


def test_empty_candidates_keep_header():
    frame = candidates_frame([])
    assert list(frame.columns) == CANDIDATE_COLUMNS
    assert frame.to_csv(index=False) == "drug_code,icd10_code,gnn_prob,nn_prob\n"
    row = candidates_frame([CandidatePair("C03CA01", "I50", 0.99, 0.1)])
    assert row.iloc[0].to_dict() == {"drug_code": "C03CA01", "icd10_code": "I50", "gnn_prob": 0.99, "nn_prob": 0.1}


def test_frequency_hits():
    part = pd.DataFrame({"label": [1, 1, 1, 0], "frequency": ["rare", "rare", "common", ""]})
    hits = frequency_hits([0.9, 0.2, 0.7, 0.99], part)
    assert hits["rare"] == [1, 2]
    assert hits["common"] == [1, 1]
    assert hits["post_marketing"] == [0, 0]


def result(model, profile, seed, auroc, rare=(1, 2)):
    return RunResult(model, profile, seed, auroc, auroc - 0.05, {"rare": list(rare), "common": [3, 4]})


def test_report_has_one_row_per_model_profile():
    results = [result("gcn", "low", s, 0.80 + 0.01 * s) for s in range(5)]
    results += [result("lr", "low", s, 0.6) for s in range(5)]
    report = build_report(reversed(results))
    assert [r.label for r in report.rows] == ["LR-low", "GCN-low"]
    gcn = report.rows[1]
    assert gcn.seeds == 5
    assert gcn.auroc == pytest.approx(0.82)
    assert gcn.auroc_ci > 0
    assert report.rows[0].auroc_ci == 0.0
    assert gcn.rare_accuracy_pooled == 0.5
    assert gcn.frequency_accuracy["common"] == 0.75
    assert gcn.frequency_accuracy["post_marketing"] is None
    assert (gcn.reference_auroc, gcn.reference_auprc) == (0.795, 0.775)
    assert report.rows[0].reference_auroc == 0.631


def test_report_handles_missing_metrics():
    report = build_report([RunResult("gat", "high", 0, None, None)])
    row = report.rows[0]
    assert row.auroc is None and row.rare_accuracy_pooled is None
    assert "n/a" in format_table(report)


def test_format_table():
    results = [result("gcn", "low", s, 0.8) for s in range(3)] + [result("gat", "high", 0, 0.7)]
    text = format_table(build_report(results))
    lines = text.splitlines()
    assert lines[0].startswith("Model")
    assert set(lines[1].replace(" ", "")) == {"-"}
    assert lines[2].startswith("GCN-low")
    assert "0.800 ± 0.000" in lines[2]
    assert lines[3].startswith("GAT-high")
    assert len(lines) == 4


def test_run_result_round_trip():
    r = result("adrgcn", "high", 2, 0.75)
    assert RunResult.from_dict(r.to_dict()) == r
