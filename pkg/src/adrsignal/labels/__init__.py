__all__ = [
    "FrequencyClass",
    "INFREQUENT",
    "AdrLabel",
    "AdrLabelFile",
    "LabelIndex",
    "LabeledPairSet",
    "SPLITS",
    "load_labels",
    "label",
    "sample_negatives",
    "pack_classes",
    "split_by_disease_class",
    "build_labeled_set",
    "pairs_from_csv",
]

from .sider import FrequencyClass, INFREQUENT, AdrLabel, AdrLabelFile, LabelIndex, load_labels, label
from .sampling import sample_negatives
from .split import (
    LabeledPairSet,
    SPLITS,
    pack_classes,
    split_by_disease_class,
    build_labeled_set,
    pairs_from_csv,
)
