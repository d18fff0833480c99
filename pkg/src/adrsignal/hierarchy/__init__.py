__all__ = [
    "AtcLevels",
    "IcdLevels",
    "CategoryEncoder",
    "parse_atc",
    "parse_icd10",
    "parse_code",
    "disease_class",
    "encode_category",
]

from .codes import (
    AtcLevels,
    IcdLevels,
    CategoryEncoder,
    parse_atc,
    parse_icd10,
    parse_code,
    disease_class,
    encode_category,
)
