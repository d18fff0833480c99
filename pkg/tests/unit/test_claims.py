import datetime as dt
import json

import pytest
from pydantic import ValidationError

from adrsignal.claims import (
    CodeKind,
    CodeVocabulary,
    build_corpus,
    build_vocabularies,
    extract_sequences,
    ingest_claims,
    read_claims,
)
from adrsignal.claims.models import Visit
from adrsignal.errors import EmptyInputError, UnparsableDateError, UnreadableFileError, VocabularyError
from conftest import record, visit


def write_csv(path, rows):
    lines = ["patient_id,date,code_type,code"] + [",".join(r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_visits_are_sorted_by_date(tmp_path):
    path = write_csv(
        tmp_path / "claims.csv",
        [("p1", "2020-01-05", "RX", "C03CA01"), ("p1", "2020-01-03", "DX", "I50")],
    )
    records = ingest_claims(path)
    assert len(records) == 1
    assert [v.date for v in records[0].visits] == [dt.date(2020, 1, 3), dt.date(2020, 1, 5)]


def test_partition_by_patient(tmp_path):
    rows = [
        ("p1", "2020-01-01", "RX", "A01AB02"),
        ("p1", "2020-01-02", "RX", "A01AB02"),
        ("p1", "2020-01-03", "DX", "I50"),
        ("p1", "2020-01-04", "DX", "I51"),
        ("p2", "2020-02-01", "RX", "C03CA01"),
        ("p2", "2020-02-02", "DX", "E11"),
        ("p2", "2020-02-03", "DX", "E11"),
        ("p3", "2020-03-01", "RX", "N02BE01"),
        ("p3", "2020-03-02", "RX", "N02BE01"),
        ("p3", "2020-03-03", "DX", "I50"),
    ]
    records = ingest_claims(write_csv(tmp_path / "claims.csv", rows))
    assert [r.patient_id for r in records] == ["p1", "p2", "p3"]
    assert sum(len(r.visits) for r in records) == 10


def test_same_day_rows_merge_into_one_visit(tmp_path):
    rows = [
        ("p1", "2020-01-01", "RX", "A01AB02"),
        ("p1", "2020-01-01", "RX", "C03CA01"),
        ("p1", "2020-01-01", "DX", "I50"),
    ]
    (rec,) = ingest_claims(write_csv(tmp_path / "claims.csv", rows))
    assert len(rec.visits) == 1
    assert rec.visits[0].prescriptions == {"A01AB02", "C03CA01"}
    assert rec.visits[0].diagnoses == {"I50"}


def test_empty_file_is_an_error(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("", encoding="utf-8")
    with pytest.raises(EmptyInputError, match="no records"):
        ingest_claims(path)

    header_only = tmp_path / "header.csv"
    header_only.write_text("patient_id,date,code_type,code\n", encoding="utf-8")
    with pytest.raises(EmptyInputError):
        ingest_claims(header_only)


def test_missing_file_and_bad_date(tmp_path):
    with pytest.raises(UnreadableFileError):
        ingest_claims(tmp_path / "nope.csv")

    path = write_csv(tmp_path / "claims.csv", [("p1", "2020/01/05", "RX", "C03CA01")])
    with pytest.raises(UnparsableDateError) as info:
        ingest_claims(path)
    assert info.value.line == 2


def test_malformed_rows_are_counted(tmp_path):
    rows = [
        ("p1", "2020-01-01", "RX", "A01AB02"),
        ("p1", "2020-01-02", "PX", "X1"),
        ("", "2020-01-02", "DX", "I50"),
    ]
    records, report = read_claims(write_csv(tmp_path / "claims.csv", rows))
    assert len(records) == 1
    assert report.rows == 3
    assert report.accepted == 1
    assert report.malformed == {"bad_row": 2}


def test_jsonl_format(tmp_path):
    path = tmp_path / "claims.jsonl"
    lines = [
        {"patient_id": "p1", "date": "2020-01-02", "rx": ["C03CA01"], "dx": []},
        {"patient_id": "p1", "date": "2020-01-01", "rx": [], "dx": ["I50"]},
    ]
    path.write_text("\n".join(json.dumps(x) for x in lines) + "\n", encoding="utf-8")
    (rec,) = ingest_claims(path, "jsonl")
    assert [v.diagnoses for v in rec.visits] == [frozenset({"I50"}), frozenset()]


def test_visit_needs_a_code():
    with pytest.raises(ValidationError):
        Visit(patient_id="p1", date=dt.date(2020, 1, 1))


def test_record_rejects_unordered_visits():
    with pytest.raises(ValidationError):
        record("p1", visit("p1", 5, rx={"A01AB02"}), visit("p1", 2, rx={"A01AB02"}))


def test_vocabulary_is_set_union_in_first_appearance_order():
    recs = [record("p1", visit("p1", 1, rx={"A", "B"}), visit("p1", 2, rx={"B", "C"}))]
    drugs, diseases = build_vocabularies(recs)
    assert drugs.size == 3
    assert drugs.id_to_code == ("A", "B", "C")
    assert diseases.size == 0


def test_vocabulary_round_trip_and_determinism(tiny_records):
    first = build_vocabularies(tiny_records)
    second = build_vocabularies(list(reversed(tiny_records)))
    assert first == second
    for vocab in first:
        for code in vocab.id_to_code:
            assert vocab.code_of(vocab.id_of(code)) == code


def test_extract_sequences_orders_by_visit_then_id():
    vocab = CodeVocabulary.from_codes(CodeKind.DRUG, ["A", "B", "C"])
    rec = record("p1", visit("p1", 1, rx={"B", "A"}), visit("p1", 2, rx={"C"}))
    assert extract_sequences(rec, vocab, CodeKind.DRUG).tokens == (0, 1, 2)

    single = record("p2", visit("p2", 1, rx={"C"}))
    assert extract_sequences(single, vocab, CodeKind.DRUG).tokens == (2,)


def test_sequence_length_matches_visit_sizes(tiny_records):
    drugs, diseases = build_vocabularies(tiny_records)
    for rec in tiny_records:
        for vocab, kind in ((drugs, CodeKind.DRUG), (diseases, CodeKind.DISEASE)):
            seq = extract_sequences(rec, vocab, kind)
            assert len(seq) == sum(len(v.codes(kind)) for v in rec.visits)


def test_missing_code_raises():
    vocab = CodeVocabulary.from_codes(CodeKind.DRUG, ["A"])
    rec = record("p1", visit("p1", 1, rx={"Z"}))
    with pytest.raises(VocabularyError):
        extract_sequences(rec, vocab, CodeKind.DRUG)


def test_corpus_skips_short_sequences(tiny_records):
    drugs, _ = build_vocabularies(tiny_records)
    rec = record("p9", visit("p9", 1, dx={"I50"}))
    corpus = build_corpus(tiny_records + [rec], drugs)
    assert all(len(seq) >= 2 for seq in corpus)
    # p3 has a single drug code
    assert len(corpus) == 2
