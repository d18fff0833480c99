import re
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from adrsignal.claims.models import CodeKind
from adrsignal.errors import MalformedCodeError, VocabularyError


ATC_PATTERN = re.compile(r"^[A-Z][0-9]{2}[A-Z]{2}[0-9]{2}$")
ICD10_PATTERN = re.compile(r"^([A-Z])([0-9]{2})(?:\.?[0-9A-Z]{1,4})?$")

# prefix lengths of the five ATC levels
ATC_LEVEL_LENGTHS = (1, 3, 4, 5, 7)


@dataclass(frozen=True)
class AtcLevels:
    level1: str
    level2: str
    level3: str
    level4: str
    level5: str

    @property
    def levels(self) -> Tuple[str, ...]:
        return (self.level1, self.level2, self.level3, self.level4, self.level5)


@dataclass(frozen=True)
class IcdLevels:
    level1: str
    level2: str

    @property
    def levels(self) -> Tuple[str, ...]:
        return (self.level1, self.level2)


def parse_atc(code: str) -> AtcLevels:
    text = str(code).strip().upper()
    if not ATC_PATTERN.match(text):
        raise MalformedCodeError(code, "ATC")
    return AtcLevels(*(text[:n] for n in ATC_LEVEL_LENGTHS))


def parse_icd10(code: str) -> IcdLevels:
    """Chapter letter and 3-character category; any subcategory is ignored."""
    text = str(code).strip().upper()
    m = ICD10_PATTERN.match(text)
    if not m:
        raise MalformedCodeError(code, "ICD-10")
    return IcdLevels(level1=m.group(1), level2=text[:3])


def disease_class(code: str) -> str:
    return parse_icd10(code).level2


Levels = Union[AtcLevels, IcdLevels]


def parse_code(code: str, kind: CodeKind) -> Levels:
    return parse_atc(code) if CodeKind(kind) is CodeKind.DRUG else parse_icd10(code)


class CategoryEncoder:
    """
    Multi-hot encoder over the observed values of each hierarchy level.

    A drug code encodes to five one-hot blocks (one per ATC level), a disease
    code to two (chapter letter, 3-character category), concatenated.
    """

    def __init__(self, kind: CodeKind, level_values: Sequence[Sequence[str]]):
        self.kind = CodeKind(kind)
        self.level_values: Tuple[Tuple[str, ...], ...] = tuple(tuple(v) for v in level_values)
        self._index = [{value: i for i, value in enumerate(values)} for values in self.level_values]
        offsets = [0]
        for values in self.level_values[:-1]:
            offsets.append(offsets[-1] + len(values))
        self.offsets: Tuple[int, ...] = tuple(offsets)
        self.total_dim = sum(len(v) for v in self.level_values)

    @property
    def n_levels(self) -> int:
        return len(self.level_values)

    @classmethod
    def fit(cls, kind: CodeKind, codes: Iterable[str]) -> "CategoryEncoder":
        kind = CodeKind(kind)
        n_levels = 5 if kind is CodeKind.DRUG else 2
        seen: List[set] = [set() for _ in range(n_levels)]
        for code in codes:
            for i, value in enumerate(parse_code(code, kind).levels):
                seen[i].add(value)
        return cls(kind, [sorted(values) for values in seen])

    def positions(self, code: str) -> List[int]:
        out = []
        for level, value in enumerate(parse_code(code, self.kind).levels):
            idx = self._index[level].get(value)
            if idx is None:
                raise VocabularyError(f"unseen level-{level + 1} value {value!r} for {self.kind.value} code {code!r}")
            out.append(self.offsets[level] + idx)
        return out

    def encode(self, code: str) -> np.ndarray:
        vec = np.zeros(self.total_dim, dtype=np.float64)
        vec[self.positions(code)] = 1.0
        return vec

    def encode_many(self, codes: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(codes), self.total_dim), dtype=np.float64)
        for row, code in enumerate(codes):
            out[row, self.positions(code)] = 1.0
        return out

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "level_values": [list(v) for v in self.level_values]}

    @classmethod
    def from_dict(cls, data: dict) -> "CategoryEncoder":
        return cls(CodeKind(data["kind"]), data["level_values"])


def encode_category(code: str, encoder: CategoryEncoder) -> np.ndarray:
    return encoder.encode(code)
