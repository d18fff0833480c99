"""Binary embedding table files: fixed header, row-major float32 body, text sidecar."""

import struct
from pathlib import Path
from typing import Tuple

import numpy as np

from adrsignal.claims.models import CodeKind
from adrsignal.embedding.skipgram import EmbeddingTable
from adrsignal.errors import MalformedInputError
from helpers.saver import atomic_write_bytes


MAGIC = b"ADREMB01"
# magic, kind, vocab_size, dim, seed
HEADER = struct.Struct("<8sBIIq")
KIND_CODES = {CodeKind.DRUG: 0, CodeKind.DISEASE: 1}


def save_embeddings(table: EmbeddingTable, path) -> Tuple[str, str]:
    path = Path(path)
    header = HEADER.pack(MAGIC, KIND_CODES[table.kind], table.vocab_size, table.dim, int(table.seed))
    body = np.ascontiguousarray(table.vectors, dtype="<f4").tobytes()
    atomic_write_bytes(path, header + body)
    sidecar = path.with_suffix(".codes.txt")
    lines = "".join(f"{i}\t{code}\n" for i, code in enumerate(table.codes))
    atomic_write_bytes(sidecar, lines.encode("utf-8"))
    return str(path), str(sidecar)


def load_embeddings(path) -> EmbeddingTable:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < HEADER.size:
        raise MalformedInputError(f"truncated embedding file {path}")
    magic, kind_code, vocab_size, dim, seed = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise MalformedInputError(f"bad embedding file magic in {path}")
    body = np.frombuffer(data, dtype="<f4", offset=HEADER.size)
    if body.size != vocab_size * dim:
        raise MalformedInputError(f"embedding body size mismatch in {path}")
    kind = {v: k for k, v in KIND_CODES.items()}[kind_code]

    codes = []
    sidecar = path.with_suffix(".codes.txt")
    if sidecar.exists():
        for line in sidecar.read_text(encoding="utf-8").splitlines():
            _, code = line.split("\t", 1)
            codes.append(code)
    return EmbeddingTable(
        kind=kind,
        vectors=body.reshape(vocab_size, dim).astype(np.float64),
        codes=tuple(codes),
        seed=seed,
    )
