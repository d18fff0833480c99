from .generator import (
    CLAIMS_FILE,
    LABELS_FILE,
    RULES_FILE,
    PlantedRule,
    SynthConfig,
    SynthCorpus,
    disease_codes,
    drug_code,
    generate_corpus,
)

__all__ = [
    "CLAIMS_FILE",
    "LABELS_FILE",
    "RULES_FILE",
    "PlantedRule",
    "SynthConfig",
    "SynthCorpus",
    "disease_codes",
    "drug_code",
    "generate_corpus",
]
