from typing import Iterable, List, Sequence, Tuple

import numpy as np

from adrsignal.errors import LabelError


def sample_negatives(
    positives: Iterable[Tuple[int, int]],
    vocabularies: Tuple[Sequence[int], Sequence[int]],
    seed: int,
) -> List[Tuple[int, int]]:
    """
    Draw as many negatives as positives, uniformly without replacement from
    the labeled drug x labeled disease grid minus the positives.

    Returns pairs sorted by (drug, disease).
    """
    positives = set(positives)
    drugs = np.asarray(sorted(set(vocabularies[0])), dtype=np.int64)
    diseases = np.asarray(sorted(set(vocabularies[1])), dtype=np.int64)
    n_drug, n_dis = len(drugs), len(diseases)

    cells = np.arange(n_drug * n_dis, dtype=np.int64)
    drug_pos = {d: k for k, d in enumerate(drugs.tolist())}
    dis_pos = {d: k for k, d in enumerate(diseases.tolist())}
    taken = np.zeros(n_drug * n_dis, dtype=bool)
    for i, j in positives:
        if i in drug_pos and j in dis_pos:
            taken[drug_pos[i] * n_dis + dis_pos[j]] = True
    complement = cells[~taken]
    if len(complement) < len(positives):
        raise LabelError(
            f"only {len(complement)} unlabeled pairs for {len(positives)} positives; cannot sample negatives"
        )

    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(complement, size=len(positives), replace=False))
    return [(int(drugs[c // n_dis]), int(diseases[c % n_dis])) for c in chosen]
