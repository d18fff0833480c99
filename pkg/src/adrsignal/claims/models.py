from dataclasses import dataclass, field
import datetime as dt
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Tuple

from pydantic import BaseModel, ConfigDict, model_validator


class CodeKind(str, Enum):
    DRUG = "drug"
    DISEASE = "disease"


class Visit(BaseModel):
    model_config = ConfigDict(frozen=True)

    patient_id: str
    date: dt.date
    prescriptions: FrozenSet[str] = frozenset()
    diagnoses: FrozenSet[str] = frozenset()

    @model_validator(mode="after")
    def _non_empty(self):
        if not self.prescriptions and not self.diagnoses:
            raise ValueError(f"visit of {self.patient_id} on {self.date} has no codes")
        return self

    def codes(self, kind: CodeKind) -> FrozenSet[str]:
        return self.prescriptions if kind is CodeKind.DRUG else self.diagnoses


class PatientRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    patient_id: str
    visits: Tuple[Visit, ...]

    @model_validator(mode="after")
    def _ordered(self):
        if not self.visits:
            raise ValueError(f"patient {self.patient_id} has no visits")
        for prev, cur in zip(self.visits, self.visits[1:]):
            if cur.date < prev.date:
                raise ValueError(f"visits of {self.patient_id} are not ordered by date")
        if any(v.patient_id != self.patient_id for v in self.visits):
            raise ValueError(f"foreign visit in record {self.patient_id}")
        return self


@dataclass(frozen=True)
class CodeSequence:
    kind: CodeKind
    tokens: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class CodeVocabulary:
    """Bijection between code strings and dense ids in ``[0, size)``."""

    kind: CodeKind
    id_to_code: Tuple[str, ...]
    code_to_id: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mapping = {code: i for i, code in enumerate(self.id_to_code)}
        if len(mapping) != len(self.id_to_code):
            raise ValueError(f"duplicate codes in {self.kind.value} vocabulary")
        object.__setattr__(self, "code_to_id", mapping)

    @classmethod
    def from_codes(cls, kind: CodeKind, codes: Iterable[str]) -> "CodeVocabulary":
        return cls(kind, tuple(codes))

    @property
    def size(self) -> int:
        return len(self.id_to_code)

    def __len__(self) -> int:
        return len(self.id_to_code)

    def __contains__(self, code: str) -> bool:
        return code in self.code_to_id

    def id_of(self, code: str) -> int:
        return self.code_to_id[code]

    def code_of(self, idx: int) -> str:
        return self.id_to_code[idx]
