import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
import pandas as pd

from adrsignal.errors import ConfigError, SplitError
from adrsignal.hierarchy.codes import disease_class
from adrsignal.labels.sampling import sample_negatives
from adrsignal.labels.sider import INFREQUENT, AdrLabelFile, FrequencyClass, LabelIndex


log = logging.getLogger("adrsignal")

SPLITS = ("train", "val", "test")
SPLIT_COLUMNS = ["drug_code", "icd10_code", "label", "frequency", "split"]
DEFAULT_RATIOS = (0.8, 0.1, 0.1)


@dataclass
class LabeledPairSet:
    """
    Labeled drug-disease pairs: columns ``drug_id, dis_id, drug_code,
    icd10_code, label, frequency, split``. Negatives carry an empty frequency.
    """

    frame: pd.DataFrame

    def __len__(self) -> int:
        return len(self.frame)

    def subset(self, split: str) -> pd.DataFrame:
        return self.frame[self.frame["split"] == split]

    def positives(self) -> pd.DataFrame:
        return self.frame[self.frame["label"] == 1]

    def negatives(self) -> pd.DataFrame:
        return self.frame[self.frame["label"] == 0]

    def with_frequency(self, classes: Iterable[FrequencyClass]) -> pd.DataFrame:
        wanted = {FrequencyClass(c).value for c in classes}
        return self.frame[self.frame["frequency"].isin(wanted)]

    def infrequent(self) -> pd.DataFrame:
        return self.with_frequency(INFREQUENT)

    def classes(self, split: str) -> set:
        return {disease_class(c) for c in self.subset(split)["icd10_code"]}

    def split_sizes(self) -> Dict[str, Dict[str, int]]:
        out = {}
        for split in SPLITS:
            part = self.subset(split)
            out[split] = {
                "pairs": int(len(part)),
                "positives": int((part["label"] == 1).sum()),
                "classes": len(self.classes(split)),
            }
        return out

    def to_csv_frame(self) -> pd.DataFrame:
        return self.frame[SPLIT_COLUMNS]


def _check_ratios(ratios: Sequence[float]) -> Tuple[float, float, float]:
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"split ratios must be three non-negative values summing to 1, got {ratios}")
    return tuple(float(r) for r in ratios)


def pack_classes(class_sizes: Dict[str, int], ratios: Sequence[float], seed: int) -> Dict[str, str]:
    """
    Greedy largest-class-first assignment of whole classes to splits, each
    class going to the split furthest below its target pair count. Ties in
    class size are broken by a seeded shuffle; ties in deficit by split order.
    """
    ratios = _check_ratios(ratios)
    if len(class_sizes) < 3:
        raise SplitError(f"need at least 3 disease classes for disjoint splits, got {len(class_sizes)}")
    rng = np.random.default_rng(seed)
    names = sorted(class_sizes)
    tiebreak = dict(zip(names, rng.permutation(len(names)).tolist()))
    order = sorted(names, key=lambda c: (-class_sizes[c], tiebreak[c]))

    total = sum(class_sizes.values())
    targets = [r * total for r in ratios]
    filled = [0, 0, 0]
    members: List[List[str]] = [[], [], []]
    for cls in order:
        deficits = [t - f for t, f in zip(targets, filled)]
        k = max(range(3), key=lambda s: (deficits[s], -s))
        filled[k] += class_sizes[cls]
        members[k].append(cls)

    # every split needs at least one class
    for k in range(3):
        if members[k]:
            continue
        donor = max((s for s in range(3) if len(members[s]) > 1), key=lambda s: filled[s] - targets[s])
        cls = min(members[donor], key=lambda c: (class_sizes[c], tiebreak[c]))
        members[donor].remove(cls)
        members[k].append(cls)
        filled[donor] -= class_sizes[cls]
        filled[k] += class_sizes[cls]

    return {cls: SPLITS[k] for k in range(3) for cls in members[k]}


def split_by_disease_class(pairs: pd.DataFrame, ratios: Sequence[float] = DEFAULT_RATIOS, seed: int = 0) -> LabeledPairSet:
    """
    Assign every pair to train/val/test so that no 3-character ICD-10 class
    appears in two splits.
    """
    frame = pairs.copy()
    frame["disease_class"] = [disease_class(c) for c in frame["icd10_code"]]
    sizes = frame.groupby("disease_class").size().to_dict()
    assignment = pack_classes({k: int(v) for k, v in sizes.items()}, ratios, seed)
    frame["split"] = frame["disease_class"].map(assignment)
    frame = frame.drop(columns=["disease_class"]).reset_index(drop=True)
    result = LabeledPairSet(frame)
    log.info("pairs_split", extra={"event": "split", "seed": seed, "count": len(frame)})
    return result


def build_labeled_set(
    labels: AdrLabelFile,
    drug_codes: Sequence[str],
    dis_codes: Sequence[str],
    seed: int,
    ratios: Sequence[float] = DEFAULT_RATIOS,
) -> LabeledPairSet:
    """Positives restricted to the graph vocabularies, equal-size negatives, class-disjoint split."""
    index = LabelIndex(labels, drug_codes, dis_codes)
    negatives = sample_negatives(index.positives.keys(), (index.drugs, index.diseases), seed)
    rows = [(i, j, 1, freq.value) for (i, j), freq in index.positives.items()]
    rows += [(i, j, 0, "") for i, j in negatives]
    frame = pd.DataFrame(rows, columns=["drug_id", "dis_id", "label", "frequency"])
    frame["drug_code"] = [drug_codes[i] for i in frame["drug_id"]]
    frame["icd10_code"] = [dis_codes[j] for j in frame["dis_id"]]
    frame = frame.sort_values(["drug_id", "dis_id"], kind="mergesort").reset_index(drop=True)
    return split_by_disease_class(frame, ratios, seed)


def pairs_from_csv(path, drug_codes: Sequence[str], dis_codes: Sequence[str]) -> LabeledPairSet:
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    drug_index = {c: i for i, c in enumerate(drug_codes)}
    dis_index = {c: i for i, c in enumerate(dis_codes)}
    df["label"] = df["label"].astype(int)
    df["drug_id"] = [drug_index[c] for c in df["drug_code"]]
    df["dis_id"] = [dis_index[c] for c in df["icd10_code"]]
    return LabeledPairSet(df[["drug_id", "dis_id", "label", "frequency", "drug_code", "icd10_code", "split"]])
