import json
import logging
from collections import Counter as TallyCounter
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import pandas as pd

from adrsignal.claims.models import PatientRecord, Visit
from adrsignal.errors import (
    EmptyInputError,
    MalformedInputError,
    UnparsableDateError,
    UnreadableFileError,
)
from adrsignal.utils.metrics import malformed_rows_total, records_ingested_total


log = logging.getLogger("adrsignal")

CLAIMS_COLUMNS = ["patient_id", "date", "code_type", "code"]
CODE_TYPES = {"RX": "rx", "DX": "dx"}


@dataclass
class IngestReport:
    rows: int = 0
    accepted: int = 0
    malformed: Dict[str, int] = field(default_factory=dict)

    @property
    def malformed_total(self) -> int:
        return sum(self.malformed.values())

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "accepted": self.accepted,
            "malformed": dict(sorted(self.malformed.items())),
        }


def parse_day(value, line: int) -> date:
    text = "" if value is None else str(value).strip()
    # YYYY-MM-DD only; no time of day
    if len(text) != 10:
        raise UnparsableDateError(text, line)
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise UnparsableDateError(text, line) from None


def normalize_claim_row(raw: dict, line: int) -> Optional[Tuple[str, date, str, str]]:
    """
    Normalize one claims CSV row into ``(patient_id, day, kind, code)``.

    Returns None for rows with a missing patient, unknown code type or empty
    code; raises on an unparsable date.
    """
    patient = raw.get("patient_id")
    code_type = raw.get("code_type")
    code = raw.get("code")
    if not _present(patient) or not _present(code):
        return None
    kind = CODE_TYPES.get(str(code_type).strip().upper()) if _present(code_type) else None
    if kind is None:
        return None
    day = parse_day(raw.get("date"), line)
    return str(patient).strip(), day, kind, str(code).strip()


def _present(value) -> bool:
    if value is None:
        return False
    if isinstance(value, float) and pd.isna(value):
        return False
    return bool(str(value).strip())


def assemble_records(entries: Iterable[Tuple[str, date, str, str]]) -> List[PatientRecord]:
    """Group normalized entries by patient, merging same-day entries into one visit."""
    days: Dict[str, Dict[date, Tuple[set, set]]] = {}
    for patient, day, kind, code in entries:
        rx, dx = days.setdefault(patient, {}).setdefault(day, (set(), set()))
        (rx if kind == "rx" else dx).add(code)

    records = []
    for patient in sorted(days):
        visits = tuple(
            Visit(patient_id=patient, date=day, prescriptions=frozenset(rx), diagnoses=frozenset(dx))
            for day, (rx, dx) in sorted(days[patient].items())
            if rx or dx
        )
        if visits:
            records.append(PatientRecord(patient_id=patient, visits=visits))
    return records


def _read_csv_entries(path: Path, report: IngestReport) -> List[Tuple[str, date, str, str]]:
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise EmptyInputError(f"no records in {path}") from None
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as exc:
        raise UnreadableFileError(f"cannot read claims file {path}: {exc}") from exc

    missing = [c for c in CLAIMS_COLUMNS if c not in df.columns]
    if missing:
        raise MalformedInputError(f"claims file {path} lacks columns {missing}")

    entries = []
    reasons = TallyCounter()
    for i, raw in enumerate(df[CLAIMS_COLUMNS].to_dict(orient="records")):
        report.rows += 1
        entry = normalize_claim_row(raw, line=i + 2)
        if entry is None:
            reasons["bad_row"] += 1
            continue
        entries.append(entry)
    report.malformed.update(reasons)
    return entries


def _read_jsonl_entries(path: Path, report: IngestReport) -> List[Tuple[str, date, str, str]]:
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UnreadableFileError(f"cannot read claims file {path}: {exc}") from exc

    entries = []
    reasons = TallyCounter()
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        report.rows += 1
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            reasons["bad_json"] += 1
            continue
        if not isinstance(obj, dict) or not _present(obj.get("patient_id")):
            reasons["bad_row"] += 1
            continue
        day = parse_day(obj.get("date"), line_no)
        patient = str(obj["patient_id"]).strip()
        rx = [c for c in obj.get("rx") or [] if _present(c)]
        dx = [c for c in obj.get("dx") or [] if _present(c)]
        if not rx and not dx:
            reasons["no_codes"] += 1
            continue
        entries.extend((patient, day, "rx", str(c).strip()) for c in rx)
        entries.extend((patient, day, "dx", str(c).strip()) for c in dx)
    report.malformed.update(reasons)
    return entries


def read_claims(path, format: str = "csv") -> Tuple[List[PatientRecord], IngestReport]:
    """
    Read a claims file into patient records plus an ingestion report.

    Args:
        path: claims file (CSV with header ``patient_id,date,code_type,code``,
            or JSONL with one ``{patient_id, date, rx, dx}`` object per visit)
        format: ``"csv"`` or ``"jsonl"``

    Returns:
        Records sorted by patient id, each with date-sorted visits, and the
        report of accepted and malformed rows.
    """
    path = Path(path)
    if not path.is_file():
        raise UnreadableFileError(f"claims file not found: {path}")
    report = IngestReport()
    fmt = str(format).lower()
    if fmt == "csv":
        entries = _read_csv_entries(path, report)
    elif fmt == "jsonl":
        entries = _read_jsonl_entries(path, report)
    else:
        raise MalformedInputError(f"unsupported claims format: {format}")

    if report.rows == 0:
        raise EmptyInputError(f"no records in {path}")
    records = assemble_records(entries)
    if not records:
        raise EmptyInputError(f"no records in {path}")

    report.accepted = report.rows - report.malformed_total
    records_ingested_total.inc(report.accepted)
    for reason, n in report.malformed.items():
        malformed_rows_total.labels(reason=reason).inc(n)
    if report.malformed_total:
        log.warning(
            "claims_malformed_rows",
            extra={"event": "ingest", "path": str(path), "count": report.malformed_total},
        )
    log.info("claims_ingested", extra={"event": "ingest", "path": str(path), "count": len(records)})
    return records, report


def ingest_claims(path, format: str = "csv") -> List[PatientRecord]:
    records, _ = read_claims(path, format)
    return records
