"""
Parameter checkpoints.

Layout: magic, format version, JSON metadata (model config and input
dims), tensor count, element width in bytes, then per tensor its name and
shape, then every tensor's values as row-major little-endian floats of
that width in the same order. float32 state is written as 32-bit floats
and anything wider as 64-bit, so a float64 model reloads bit-exactly.
Version 1 files (no width field, always 32-bit) still load.
"""

import io
import json
import struct
from pathlib import Path
from typing import Dict, Tuple

import numpy as np
import torch

from adrsignal.errors import MalformedInputError
from adrsignal.gnn.tensors import DTYPE
from helpers.saver import atomic_write_bytes


MAGIC = b"ADRCKPT\x00"
VERSION = 2
WIDTHS = {4: "<f4", 8: "<f8"}


def _width(state: Dict[str, torch.Tensor]) -> int:
    if state and all(t.dtype == torch.float32 for t in state.values()):
        return 4
    return 8


def encode_state(state: Dict[str, torch.Tensor], meta: dict) -> bytes:
    out = io.BytesIO()
    meta_bytes = json.dumps(meta, sort_keys=True).encode("utf-8")
    out.write(struct.pack("<8sII", MAGIC, VERSION, len(meta_bytes)))
    out.write(meta_bytes)
    names = list(state)
    width = _width(state)
    out.write(struct.pack("<IB", len(names), width))
    for name in names:
        raw = name.encode("utf-8")
        shape = tuple(state[name].shape)
        out.write(struct.pack("<H", len(raw)))
        out.write(raw)
        out.write(struct.pack("<B", len(shape)))
        out.write(struct.pack(f"<{len(shape)}I", *shape))
    for name in names:
        arr = state[name].detach().cpu().numpy()
        out.write(np.ascontiguousarray(arr, dtype=WIDTHS[width]).tobytes())
    return out.getvalue()


def decode_state(data: bytes) -> Tuple[Dict[str, torch.Tensor], dict]:
    buf = io.BytesIO(data)
    head = buf.read(16)
    if len(head) < 16:
        raise MalformedInputError("truncated checkpoint")
    magic, version, meta_len = struct.unpack("<8sII", head)
    if magic != MAGIC:
        raise MalformedInputError("not a parameter checkpoint")
    if version not in (1, VERSION):
        raise MalformedInputError(f"unsupported checkpoint version {version}")
    meta = json.loads(buf.read(meta_len).decode("utf-8"))
    (count,) = struct.unpack("<I", buf.read(4))
    width = 4
    if version >= 2:
        (width,) = struct.unpack("<B", buf.read(1))
        if width not in WIDTHS:
            raise MalformedInputError(f"unsupported element width {width}")
    specs = []
    for _ in range(count):
        (name_len,) = struct.unpack("<H", buf.read(2))
        name = buf.read(name_len).decode("utf-8")
        (ndim,) = struct.unpack("<B", buf.read(1))
        shape = struct.unpack(f"<{ndim}I", buf.read(4 * ndim)) if ndim else ()
        specs.append((name, shape))
    state = {}
    for name, shape in specs:
        n = int(np.prod(shape)) if shape else 1
        raw = buf.read(width * n)
        if len(raw) != width * n:
            raise MalformedInputError(f"truncated tensor {name} in checkpoint")
        arr = np.frombuffer(raw, dtype=WIDTHS[width]).reshape(shape)
        state[name] = torch.as_tensor(arr.astype(np.float64), dtype=DTYPE)
    return state, meta


def save_checkpoint(module: torch.nn.Module, path, meta: dict) -> str:
    return atomic_write_bytes(Path(path), encode_state(module.state_dict(), meta))


def load_checkpoint(path) -> Tuple[Dict[str, torch.Tensor], dict]:
    return decode_state(Path(path).read_bytes())
