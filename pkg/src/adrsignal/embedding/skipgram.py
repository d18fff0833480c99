import logging
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from adrsignal.claims.models import CodeKind, CodeSequence, CodeVocabulary
from adrsignal.errors import EmptyInputError, VocabularyError
from adrsignal.utils.metrics import skipgram_pairs_total


log = logging.getLogger("adrsignal")

UNIGRAM_POWER = 0.75


class SkipgramConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    window: int = Field(16, ge=1)
    dim: int = Field(128, ge=2)
    negatives_per_positive: int = Field(5, ge=1)
    epochs: int = Field(5, ge=0)
    learning_rate: float = Field(0.025, gt=0)
    # pairs per update; 1 is plain per-pair SGD
    batch_size: int = Field(1, ge=1)
    seed: int = Field(0, ge=0)


@dataclass
class EmbeddingTable:
    kind: CodeKind
    vectors: np.ndarray
    codes: Tuple[str, ...] = ()
    seed: int = 0
    epoch_losses: Tuple[float, ...] = field(default=(), compare=False)

    @property
    def vocab_size(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


@dataclass
class SkipgramTables:
    """Center (input) and context (output) tables of one embedding space."""

    center: np.ndarray
    context: np.ndarray


def generate_pairs(seq: CodeSequence, window: int, seed: Optional[int] = None) -> Iterator[Tuple[int, int]]:
    """
    Every (token[t], token[t+j]) with 0 < |j| <= window inside the sequence.

    Pairs come in positional order; with a seed they come in a seeded
    shuffled order instead.
    """
    tokens = seq.tokens if isinstance(seq, CodeSequence) else tuple(seq)
    n = len(tokens)
    pairs = [
        (tokens[t], tokens[c])
        for t in range(n)
        for c in range(max(0, t - window), min(n, t + window + 1))
        if c != t
    ]
    if seed is not None:
        order = np.random.default_rng(seed).permutation(len(pairs))
        pairs = [pairs[i] for i in order]
    return iter(pairs)


def pair_array(corpus: Sequence[CodeSequence], window: int) -> np.ndarray:
    rows = [p for seq in corpus for p in generate_pairs(seq, window)]
    if not rows:
        return np.zeros((0, 2), dtype=np.int64)
    return np.asarray(rows, dtype=np.int64)


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def sgns_loss_and_grads(center: int, context: int, negatives: Sequence[int], tables: SkipgramTables):
    """
    Loss ``-log s(u.v) - sum_n log s(-u.v_n)`` and its gradients.

    Returns ``(loss, grad_u, grad_v, grad_negatives)`` where ``grad_negatives``
    has one row per entry of ``negatives``.
    """
    u = tables.center[center]
    v = tables.context[context]
    neg = np.asarray(negatives, dtype=np.int64)
    vn = tables.context[neg] if len(neg) else np.zeros((0, u.shape[0]))

    s = float(u @ v)
    sn = vn @ u
    loss = -_log_sigmoid(s) - float(np.sum(_log_sigmoid(-sn)))

    g_pos = _sigmoid(s) - 1.0
    g_neg = _sigmoid(sn)
    grad_u = g_pos * v + g_neg @ vn
    grad_v = g_pos * u
    grad_vn = g_neg[:, None] * u[None, :]
    return loss, grad_u, grad_v, grad_vn


def sgns_step(center: int, context: int, negatives: Sequence[int], tables: SkipgramTables, lr: float):
    """One SGD step on a single positive pair and its negatives; updates ``tables`` in place."""
    loss, grad_u, grad_v, grad_vn = sgns_loss_and_grads(center, context, negatives, tables)
    tables.context[context] -= lr * grad_v
    if len(negatives):
        np.add.at(tables.context, np.asarray(negatives, dtype=np.int64), -lr * grad_vn)
    tables.center[center] -= lr * grad_u
    return tables, loss


def sgns_batch_step(pairs: np.ndarray, negatives: np.ndarray, tables: SkipgramTables, lr: float) -> float:
    """Summed-gradient step over a block of pairs; returns the summed loss."""
    centers = pairs[:, 0]
    contexts = pairs[:, 1]
    u = tables.center[centers]
    v = tables.context[contexts]
    vn = tables.context[negatives]

    s = np.einsum("bd,bd->b", u, v)
    sn = np.einsum("bkd,bd->bk", vn, u)
    loss = float(-np.sum(_log_sigmoid(s)) - np.sum(_log_sigmoid(-sn)))

    g_pos = _sigmoid(s) - 1.0
    g_neg = _sigmoid(sn)
    grad_u = g_pos[:, None] * v + np.einsum("bk,bkd->bd", g_neg, vn)
    grad_v = g_pos[:, None] * u
    grad_vn = g_neg[:, :, None] * u[:, None, :]

    np.add.at(tables.context, contexts, -lr * grad_v)
    np.add.at(tables.context, negatives.reshape(-1), -lr * grad_vn.reshape(-1, u.shape[1]))
    np.add.at(tables.center, centers, -lr * grad_u)
    return loss


def negative_distribution(corpus: Sequence[CodeSequence], vocab_size: int) -> np.ndarray:
    counts = np.zeros(vocab_size, dtype=np.float64)
    for seq in corpus:
        np.add.at(counts, np.asarray(seq.tokens, dtype=np.int64), 1.0)
    weights = counts ** UNIGRAM_POWER
    return weights / weights.sum()


def init_tables(vocab_size: int, dim: int, seed: int) -> SkipgramTables:
    rng = np.random.default_rng(seed)
    bound = 0.5 / dim
    center = rng.uniform(-bound, bound, size=(vocab_size, dim))
    context = np.zeros((vocab_size, dim), dtype=np.float64)
    return SkipgramTables(center=center, context=context)


def train_embeddings(
    corpus: Sequence[CodeSequence],
    config: SkipgramConfig,
    vocab: CodeVocabulary,
) -> EmbeddingTable:
    """
    Train skip-gram with negative sampling on one kind's sequences.

    The learning rate decays linearly from ``config.learning_rate`` to 0 over
    all updates; returns the center-word table.
    """
    corpus = [seq for seq in corpus if len(seq) >= 2]
    if not corpus:
        raise EmptyInputError(f"empty {vocab.kind.value} skip-gram corpus")
    if any(seq.kind is not vocab.kind for seq in corpus):
        raise VocabularyError(f"corpus mixes kinds with {vocab.kind.value} vocabulary")
    if any(t < 0 or t >= vocab.size for seq in corpus for t in seq.tokens):
        raise VocabularyError(f"token id outside the {vocab.kind.value} vocabulary")

    tables = init_tables(vocab.size, config.dim, config.seed)
    pairs = pair_array(corpus, config.window)
    probs = negative_distribution(corpus, vocab.size)
    rng = np.random.default_rng([config.seed, 1])

    n_pairs = len(pairs)
    k = config.negatives_per_positive
    total_steps = max(1, config.epochs * n_pairs)
    step = 0
    epoch_losses: List[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(n_pairs)
        negatives = rng.choice(vocab.size, size=(n_pairs, k), p=probs)
        epoch_loss = 0.0
        for start in range(0, n_pairs, config.batch_size):
            idx = order[start:start + config.batch_size]
            lr = config.learning_rate * (1.0 - step / total_steps)
            if config.batch_size == 1:
                i = int(idx[0])
                _, loss = sgns_step(int(pairs[i, 0]), int(pairs[i, 1]), negatives[i], tables, lr)
            else:
                loss = sgns_batch_step(pairs[idx], negatives[idx], tables, lr)
            epoch_loss += loss
            step += len(idx)
        epoch_losses.append(epoch_loss / max(1, n_pairs))
        skipgram_pairs_total.labels(kind=vocab.kind.value).inc(n_pairs)
        log.info(
            "skipgram_epoch",
            extra={"event": "embed", "epoch": epoch, "loss": epoch_losses[-1], "count": n_pairs},
        )

    return EmbeddingTable(
        kind=vocab.kind,
        vectors=tables.center,
        codes=tuple(vocab.id_to_code),
        seed=config.seed,
        epoch_losses=tuple(epoch_losses),
    )
