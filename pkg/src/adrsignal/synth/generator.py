"""
Seeded synthetic claims corpora with planted drug-ADR rules.

Drugs are grouped into co-prescription clusters sharing ATC prefixes; every
patient draws most of a regimen from one home cluster and is diagnosed
mostly with that cluster's indications. A planted rule adds its ADR disease
to visits after the trigger drug's first prescription.
"""

import datetime as dt
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Set, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from adrsignal.claims.ingest import CLAIMS_COLUMNS
from adrsignal.errors import ConfigError
from adrsignal.labels.sider import LABEL_COLUMNS, FrequencyClass
from helpers.saver import DataSaver


log = logging.getLogger("adrsignal")

CLUSTER_LETTERS = "ABCDGHJLMNPRSV"
CODE_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
START_DAY = dt.date(2015, 1, 1)
HOME_CLUSTER_SHARE = 0.8
REGIMEN_ADHERENCE = 0.8
STRAY_DRUG_RATE = 0.1
INDICATION_SHARE = 0.7
FREQUENCY_WEIGHTS = {
    FrequencyClass.COMMON: 0.5,
    FrequencyClass.RARE: 0.25,
    FrequencyClass.POST_MARKETING: 0.15,
    FrequencyClass.UNKNOWN: 0.1,
}

CLAIMS_FILE = "claims.csv"
LABELS_FILE = "labels.tsv"
RULES_FILE = "rules.json"


class SynthConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_patients: int = Field(2000, ge=1)
    n_drugs: int = Field(60, ge=1)
    n_clusters: int = Field(6, ge=1)
    n_diseases: int = Field(60, ge=1)
    n_visits_mean: float = Field(6.0, gt=0)
    n_adr_rules: int = Field(40, ge=1)
    adr_strength: float = Field(0.8, ge=0, le=1)
    # distractor positives per planted rule
    distractor_rate: float = Field(0.2, ge=0)
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _feasible(self):
        if self.n_clusters > self.n_drugs:
            raise ValueError(f"{self.n_clusters} clusters for {self.n_drugs} drugs")
        if self.n_clusters > len(CLUSTER_LETTERS) * 99 or math.ceil(self.n_drugs / self.n_clusters) > 20 * 26:
            raise ValueError("drug clusters do not fit the synthetic ATC code space")
        if self.n_diseases > 26 * 90 * 4:
            raise ValueError("too many diseases for the synthetic ICD-10 code space")
        return self


@dataclass(frozen=True)
class PlantedRule:
    drug_code: str
    icd10_code: str
    strength: float
    planted: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SynthCorpus:
    config: SynthConfig
    claims: pd.DataFrame
    labels: pd.DataFrame
    rules: List[PlantedRule]
    drug_codes: List[str]
    dis_codes: List[str]
    clusters: List[List[int]]

    def manifest(self) -> dict:
        return {
            "config": self.config.model_dump(mode="json"),
            "rules": [r.to_dict() for r in self.rules],
            "clusters": [[self.drug_codes[i] for i in c] for c in self.clusters],
        }

    def write(self, directory) -> Dict[str, str]:
        """Write the claims CSV, label TSV and rule manifest under ``directory``."""
        saver = DataSaver(directory)
        paths = {
            "claims": saver.save_csv(self.claims, CLAIMS_FILE),
            "labels": saver.save_csv(self.labels, LABELS_FILE, sep="\t"),
            "rules": saver.save_json(self.manifest(), RULES_FILE),
        }
        log.info("synth_written", extra={"event": "synth", "path": str(Path(directory)), "count": len(self.claims)})
        return paths


def drug_code(cluster: int, member: int) -> str:
    """ATC-shaped code; members of one cluster share the first three levels' prefix."""
    letter = CLUSTER_LETTERS[cluster % len(CLUSTER_LETTERS)]
    group = 1 + cluster // len(CLUSTER_LETTERS)
    return f"{letter}{group:02d}{CODE_LETTERS[member // 20]}{CODE_LETTERS[(member // 5) % 4]}{member % 5 + 1:02d}"


def disease_codes(n_diseases: int) -> List[str]:
    n_classes = min(n_diseases, max(10, math.ceil(n_diseases / 4)))
    codes = []
    for d in range(n_diseases):
        cls = d % n_classes
        codes.append(f"{CODE_LETTERS[cls % 26]}{10 + cls // 26:02d}.{d // n_classes}")
    return codes


def _sample_frequency(rng: np.random.Generator) -> FrequencyClass:
    classes = list(FREQUENCY_WEIGHTS)
    weights = np.array([FREQUENCY_WEIGHTS[c] for c in classes])
    return classes[int(rng.choice(len(classes), p=weights / weights.sum()))]


def generate_corpus(config: SynthConfig) -> SynthCorpus:
    """Build claims rows, label rows and planted rules deterministically from ``config.seed``."""
    n_rules = config.n_adr_rules
    if n_rules > config.n_drugs * config.n_diseases:
        raise ConfigError(
            f"{n_rules} ADR rules exceed the {config.n_drugs * config.n_diseases} drug-disease pairs"
        )
    rng = np.random.default_rng(config.seed)

    clusters = [list(map(int, c)) for c in np.array_split(np.arange(config.n_drugs), config.n_clusters)]
    cluster_of = {}
    drug_codes = [""] * config.n_drugs
    for c, members in enumerate(clusters):
        for m, d in enumerate(members):
            drug_codes[d] = drug_code(c, m)
            cluster_of[d] = c
    dis_codes = disease_codes(config.n_diseases)

    per_cluster = max(1, config.n_diseases // (2 * config.n_clusters))
    indications = [
        sorted({(c * per_cluster + k) % config.n_diseases for k in range(per_cluster)})
        for c in range(config.n_clusters)
    ]

    indicated = {(d, j) for d in range(config.n_drugs) for j in indications[cluster_of[d]]}
    free = [(d, j) for d in range(config.n_drugs) for j in range(config.n_diseases) if (d, j) not in indicated]
    pool = free if len(free) >= n_rules else free + sorted(indicated)
    chosen = sorted(pool[int(k)] for k in rng.choice(len(pool), size=n_rules, replace=False))
    rules_by_drug: Dict[int, List[int]] = {}
    for d, j in chosen:
        rules_by_drug.setdefault(d, []).append(j)

    rows: List[Tuple[str, str, str, str]] = []
    for n in range(config.n_patients):
        pid = f"p{n:05d}"
        home = int(rng.integers(config.n_clusters))
        regimen: List[int] = []
        for _ in range(int(rng.integers(2, 4))):
            source = clusters[home] if rng.random() < HOME_CLUSTER_SHARE else range(config.n_drugs)
            drug = int(rng.choice(list(source)))
            if drug not in regimen:
                regimen.append(drug)

        n_visits = max(1, int(rng.poisson(config.n_visits_mean)))
        day = START_DAY + dt.timedelta(days=int(rng.integers(0, 365)))
        exposed: Set[int] = set()
        for _ in range(n_visits):
            prescribed = {d for d in regimen if rng.random() < REGIMEN_ADHERENCE}
            if rng.random() < STRAY_DRUG_RATE:
                prescribed.add(int(rng.integers(config.n_drugs)))

            diagnosed: Set[int] = set()
            for _ in range(1 + int(rng.poisson(0.5))):
                if rng.random() < INDICATION_SHARE:
                    diagnosed.add(int(rng.choice(indications[home])))
                else:
                    diagnosed.add(int(rng.integers(config.n_diseases)))
            for d in sorted(exposed):
                for j in rules_by_drug.get(d, ()):
                    if rng.random() < config.adr_strength:
                        diagnosed.add(j)
            if not prescribed and not diagnosed:
                prescribed.add(regimen[0])

            stamp = day.isoformat()
            rows.extend((pid, stamp, "RX", c) for c in sorted(drug_codes[d] for d in prescribed))
            rows.extend((pid, stamp, "DX", c) for c in sorted(dis_codes[j] for j in diagnosed))
            exposed |= prescribed
            day += dt.timedelta(days=int(rng.integers(1, 60)))

    rules = [PlantedRule(drug_codes[d], dis_codes[j], config.adr_strength) for d, j in chosen]
    planted = set(chosen)
    candidates = sorted(indicated - planted)
    n_distractors = min(len(candidates), int(round(config.distractor_rate * n_rules)))
    distractors = [candidates[int(k)] for k in sorted(rng.choice(len(candidates), size=n_distractors, replace=False))]
    rules += [PlantedRule(drug_codes[d], dis_codes[j], 0.0, planted=False) for d, j in distractors]

    label_rows = sorted(
        (rule.drug_code, rule.icd10_code, _sample_frequency(rng).value) for rule in rules
    )
    claims = pd.DataFrame(rows, columns=CLAIMS_COLUMNS)
    labels = pd.DataFrame(label_rows, columns=LABEL_COLUMNS)
    log.info(
        "synth_generated",
        extra={"event": "synth", "seed": config.seed, "count": config.n_patients},
    )
    return SynthCorpus(config, claims, labels, rules, drug_codes, dis_codes, clusters)
