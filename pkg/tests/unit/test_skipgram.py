import numpy as np
import pytest
from pydantic import ValidationError

from adrsignal.claims.ingest import ingest_claims
from adrsignal.claims.models import CodeKind, CodeSequence, CodeVocabulary
from adrsignal.claims.vocabulary import build_corpus, build_vocabularies
from adrsignal.embedding import (
    EmbeddingTable,
    SkipgramConfig,
    SkipgramTables,
    generate_pairs,
    load_embeddings,
    save_embeddings,
    sgns_loss_and_grads,
    sgns_step,
    train_embeddings,
)
from adrsignal.embedding.skipgram import init_tables
from adrsignal.errors import EmptyInputError
from adrsignal.synth import SynthConfig, generate_corpus


def seq(*tokens):
    return CodeSequence(CodeKind.DRUG, tuple(tokens))


def test_pairs_within_window():
    assert list(generate_pairs(seq(0, 1, 2), window=1)) == [(0, 1), (1, 0), (1, 2), (2, 1)]
    assert list(generate_pairs(seq(4), window=16)) == []


def test_pair_count_for_long_window():
    n, window = 40, 16
    pairs = list(generate_pairs(seq(*range(n)), window))
    expected = sum(min(n - 1, t + window) - max(0, t - window) for t in range(n))
    assert len(pairs) == expected


def test_seeded_pairs_are_a_permutation():
    s = seq(*range(10))
    base = sorted(generate_pairs(s, 3))
    assert sorted(generate_pairs(s, 3, seed=5)) == base
    assert list(generate_pairs(s, 3, seed=5)) == list(generate_pairs(s, 3, seed=5))


def test_config_invariants():
    assert SkipgramConfig().window == 16
    for bad in ({"window": 0}, {"dim": 1}, {"negatives_per_positive": 0}):
        with pytest.raises(ValidationError):
            SkipgramConfig(**bad)


def numeric_gradient(f, x, eps=1e-6):
    grad = np.zeros_like(x)
    for k in range(x.size):
        orig = x.flat[k]
        x.flat[k] = orig + eps
        up = f()
        x.flat[k] = orig - eps
        down = f()
        x.flat[k] = orig
        grad.flat[k] = (up - down) / (2 * eps)
    return grad


def test_sgns_gradients_match_finite_differences():
    rng = np.random.default_rng(0)
    tables = SkipgramTables(center=rng.normal(size=(6, 4)), context=rng.normal(size=(6, 4)))
    center, context, negatives = 1, 2, np.array([3, 4, 5])

    def loss():
        return sgns_loss_and_grads(center, context, negatives, tables)[0]

    _, grad_u, grad_v, grad_vn = sgns_loss_and_grads(center, context, negatives, tables)

    full_center = numeric_gradient(loss, tables.center)
    full_context = numeric_gradient(loss, tables.context)
    np.testing.assert_allclose(grad_u, full_center[center], atol=1e-7)
    np.testing.assert_allclose(grad_v, full_context[context], atol=1e-7)
    np.testing.assert_allclose(grad_vn, full_context[negatives], atol=1e-7)


def test_sgns_step_lowers_loss():
    rng = np.random.default_rng(1)
    tables = SkipgramTables(center=rng.normal(size=(5, 3)), context=rng.normal(size=(5, 3)))
    before = sgns_loss_and_grads(0, 1, [2, 3], tables)[0]
    sgns_step(0, 1, [2, 3], tables, lr=0.05)
    after = sgns_loss_and_grads(0, 1, [2, 3], tables)[0]
    assert after < before


def test_loss_at_zero_dot_product():
    tables = SkipgramTables(center=np.zeros((3, 4)), context=np.zeros((3, 4)))
    _, loss = sgns_step(0, 1, [], tables, lr=0.1)
    assert loss == pytest.approx(np.log(2))
    tables = SkipgramTables(center=np.zeros((3, 4)), context=np.zeros((3, 4)))
    _, loss = sgns_step(0, 1, [2], tables, lr=0.1)
    assert loss == pytest.approx(2 * np.log(2))


def corpus_and_vocab():
    vocab = CodeVocabulary.from_codes(CodeKind.DRUG, ["A01AB02", "A01AB03", "C03CA01", "C03CA02"])
    corpus = [seq(0, 1, 0, 1, 0, 1), seq(2, 3, 2, 3, 3, 2), seq(0, 1, 1, 0)] * 5
    return corpus, vocab


@pytest.mark.parametrize("batch_size", [1, 8])
def test_training_is_deterministic(batch_size):
    corpus, vocab = corpus_and_vocab()
    config = SkipgramConfig(dim=6, epochs=3, window=2, batch_size=batch_size, seed=11)
    a = train_embeddings(corpus, config, vocab)
    b = train_embeddings(corpus, config, vocab)
    assert a.vectors.shape == (4, 6)
    assert np.array_equal(a.vectors, b.vectors)
    assert np.all(np.isfinite(a.vectors))
    assert a.codes == vocab.id_to_code


def test_cooccurring_codes_end_up_closer():
    corpus, vocab = corpus_and_vocab()
    table = train_embeddings(corpus * 4, SkipgramConfig(dim=8, epochs=10, window=2, seed=2), vocab)
    v = table.vectors / np.linalg.norm(table.vectors, axis=1, keepdims=True)
    assert v[0] @ v[1] > v[0] @ v[2]


def test_zero_epochs_returns_initialization():
    corpus, vocab = corpus_and_vocab()
    config = SkipgramConfig(dim=6, epochs=0, window=2, seed=4)
    table = train_embeddings(corpus, config, vocab)
    assert np.array_equal(table.vectors, init_tables(vocab.size, 6, 4).center)
    assert table.epoch_losses == ()


def test_epoch_loss_falls_on_planted_corpus(tmp_path):
    synth = generate_corpus(SynthConfig(seed=3, n_patients=300, n_drugs=20, n_clusters=4, n_diseases=20, n_adr_rules=10))
    records = ingest_claims(synth.write(tmp_path)["claims"])
    drug_vocab, _ = build_vocabularies(records)
    config = SkipgramConfig(dim=16, epochs=3, window=2, seed=1)
    table = train_embeddings(build_corpus(records, drug_vocab), config, drug_vocab)
    assert len(table.epoch_losses) == 3
    assert table.epoch_losses[-1] < table.epoch_losses[0]


def test_empty_corpus_raises():
    vocab = CodeVocabulary.from_codes(CodeKind.DRUG, ["A01AB02"])
    with pytest.raises(EmptyInputError):
        train_embeddings([seq(0)], SkipgramConfig(dim=4), vocab)


def test_embedding_file_round_trip(tmp_path):
    table = EmbeddingTable(
        kind=CodeKind.DISEASE,
        vectors=np.arange(12, dtype=np.float64).reshape(3, 4) / 8.0,
        codes=("I50", "I51", "E11"),
        seed=42,
    )
    path, sidecar = save_embeddings(table, tmp_path / "disease.emb")
    loaded = load_embeddings(path)
    assert loaded.kind is CodeKind.DISEASE
    assert loaded.codes == table.codes
    assert loaded.seed == 42
    np.testing.assert_array_equal(loaded.vectors, table.vectors)
