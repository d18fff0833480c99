"""Persistence utilities for pipeline artifacts."""

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Union

import pandas as pd


PathLike = Union[str, Path]


def sha256_file(path: PathLike) -> str:
    """Hex SHA-256 digest of a file's bytes."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def atomic_write_bytes(path: PathLike, data: bytes) -> str:
    """
    Write bytes to ``path`` through a temp file in the same directory and
    rename it into place, so readers never observe a partial file.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(target.parent), prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return str(target)


class DataSaver:
    """Utility class for saving run artifacts in JSON, CSV, text or binary form."""

    def __init__(self, base_path: PathLike = "data/runs"):
        """
        Initialize DataSaver.

        Args:
            base_path: Base directory for saving files
        """
        self.base_path = Path(base_path)
        self.base_path.mkdir(parents=True, exist_ok=True)

    def path(self, filename: str) -> Path:
        return self.base_path / filename

    def save_json(self, data: Any, filename: str) -> str:
        """
        Write a JSON document with sorted keys so identical data gives identical bytes.

        Args:
            data: JSON-serializable object
            filename: Output filename (with extension)

        Returns:
            Path to saved file
        """
        text = json.dumps(data, indent=2, sort_keys=True, default=str) + "\n"
        return atomic_write_bytes(self.path(filename), text.encode("utf-8"))

    def save_csv(self, df: pd.DataFrame, filename: str, sep: str = ",") -> str:
        """
        Write a DataFrame as CSV (or TSV with ``sep="\\t"``) without the index.

        Args:
            df: Rows to write.
            filename: Output filename (with extension).
            sep: Field separator.

        Returns:
            Path to saved file.
        """
        text = df.to_csv(index=False, sep=sep, lineterminator="\n")
        return atomic_write_bytes(self.path(filename), text.encode("utf-8"))

    def save_text(self, text: str, filename: str) -> str:
        return atomic_write_bytes(self.path(filename), text.encode("utf-8"))

    def save_bytes(self, data: bytes, filename: str) -> str:
        return atomic_write_bytes(self.path(filename), data)

    def load_json(self, filename: str) -> Any:
        with open(self.path(filename), "r", encoding="utf-8") as f:
            return json.load(f)

    def exists(self, filename: str) -> bool:
        return self.path(filename).exists()
