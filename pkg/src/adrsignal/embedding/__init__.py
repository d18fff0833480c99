__all__ = [
    "SkipgramConfig",
    "EmbeddingTable",
    "SkipgramTables",
    "generate_pairs",
    "sgns_loss_and_grads",
    "sgns_step",
    "train_embeddings",
    "save_embeddings",
    "load_embeddings",
]

from .skipgram import (
    SkipgramConfig,
    EmbeddingTable,
    SkipgramTables,
    generate_pairs,
    sgns_loss_and_grads,
    sgns_step,
    train_embeddings,
)
from .store import save_embeddings, load_embeddings
