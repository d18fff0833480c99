import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Sequence, Set, Tuple

import pandas as pd

from adrsignal.errors import EmptyInputError, LabelError, MalformedCodeError, UnreadableFileError
from adrsignal.hierarchy.codes import parse_atc, parse_icd10


log = logging.getLogger("adrsignal")

LABEL_COLUMNS = ["atc_code", "icd10_code", "frequency"]


class FrequencyClass(str, Enum):
    COMMON = "common"
    RARE = "rare"
    POST_MARKETING = "post_marketing"
    UNKNOWN = "unknown"


INFREQUENT = frozenset({FrequencyClass.RARE, FrequencyClass.POST_MARKETING})


@dataclass(frozen=True)
class AdrLabel:
    atc_code: str
    icd10_code: str
    frequency: FrequencyClass = FrequencyClass.UNKNOWN


@dataclass(frozen=True)
class AdrLabelFile:
    rows: Tuple[AdrLabel, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def pairs(self) -> Set[Tuple[str, str]]:
        return {(r.atc_code, r.icd10_code) for r in self.rows}

    def with_frequency(self, classes: Iterable[FrequencyClass]) -> List[AdrLabel]:
        wanted = {FrequencyClass(c) for c in classes}
        return [r for r in self.rows if r.frequency in wanted]

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(r.atc_code, r.icd10_code, r.frequency.value) for r in self.rows],
            columns=LABEL_COLUMNS,
        )


def parse_frequency(value: str, line: int) -> FrequencyClass:
    text = str(value).strip().lower().replace("-", "_").replace(" ", "_")
    try:
        return FrequencyClass(text)
    except ValueError:
        log.warning("unknown frequency class %r at line %d", value, line, extra={"event": "labels"})
        return FrequencyClass.UNKNOWN


def load_labels(path) -> AdrLabelFile:
    """
    Read a tab-separated ADR label file (``atc_code, icd10_code, frequency``).

    Codes are validated against the ATC and ICD-10 shapes; a repeated
    (drug, disease) pair is an error.
    """
    path = Path(path)
    if not path.is_file():
        raise UnreadableFileError(f"label file not found: {path}")
    try:
        df = pd.read_csv(path, sep="\t", dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise EmptyInputError(f"no labels in {path}") from None
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as exc:
        raise UnreadableFileError(f"cannot read label file {path}: {exc}") from exc

    missing = [c for c in LABEL_COLUMNS if c not in df.columns]
    if missing:
        raise LabelError(f"label file {path} lacks columns {missing}")

    rows = []
    seen: Dict[Tuple[str, str], int] = {}
    for i, raw in enumerate(df[LABEL_COLUMNS].to_dict(orient="records")):
        line = i + 2
        atc = str(raw["atc_code"]).strip().upper()
        icd = str(raw["icd10_code"]).strip().upper()
        try:
            parse_atc(atc)
            parse_icd10(icd)
        except MalformedCodeError as exc:
            raise LabelError(f"malformed row at line {line}: {exc}") from exc
        if (atc, icd) in seen:
            raise LabelError(f"duplicate pair ({atc}, {icd}) at lines {seen[(atc, icd)]} and {line}")
        seen[(atc, icd)] = line
        rows.append(AdrLabel(atc, icd, parse_frequency(raw["frequency"], line)))
    log.info("labels_loaded", extra={"event": "labels", "path": str(path), "count": len(rows)})
    return AdrLabelFile(tuple(rows))


class LabelIndex:
    """
    The label function over the labeled subset of a graph's vocabularies.

    Ids are the graph's drug and disease ids; only drugs and diseases that
    occur in some label row and in the graph form the domain.
    """

    def __init__(self, labels: AdrLabelFile, drug_codes: Sequence[str], dis_codes: Sequence[str]):
        drug_index = {c: i for i, c in enumerate(drug_codes)}
        dis_index = {c: i for i, c in enumerate(dis_codes)}
        positives = {}
        for row in labels.rows:
            i = drug_index.get(row.atc_code)
            j = dis_index.get(row.icd10_code)
            if i is None or j is None:
                continue
            positives[(i, j)] = row.frequency
        self.positives: Dict[Tuple[int, int], FrequencyClass] = dict(sorted(positives.items()))
        self.drugs: Tuple[int, ...] = tuple(sorted({i for i, _ in self.positives}))
        self.diseases: Tuple[int, ...] = tuple(sorted({j for _, j in self.positives}))
        self._drug_set: FrozenSet[int] = frozenset(self.drugs)
        self._dis_set: FrozenSet[int] = frozenset(self.diseases)

    def __len__(self) -> int:
        return len(self.positives)

    def label(self, v: int, w: int) -> int:
        if v not in self._drug_set:
            raise LabelError(f"drug id {v} is outside the labeled drug set")
        if w not in self._dis_set:
            raise LabelError(f"disease id {w} is outside the labeled disease set")
        return 1 if (v, w) in self.positives else 0


def label(v: int, w: int, labels: LabelIndex) -> int:
    return labels.label(v, w)
