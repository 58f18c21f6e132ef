import hashlib
import json
from pathlib import Path

import numpy as np

from app.core.errors import TensorParseError
from app.models.tensor import Tensor, validate


# ── Tensor files ──────────────────────────────────────────────────────────────
# {"order": m, "dim": n, "format": "dense"|"coo", "entries": ...}, 1-based idx.

def load_tensor(path: str | Path) -> tuple[Tensor, str]:
    """Parse a tensor file. Returns (tensor, sha256 of the file bytes)."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise TensorParseError(f"cannot read {path}: {e.strerror}") from e
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as e:
        raise TensorParseError(f"{path} is not valid JSON: {e.msg} (line {e.lineno})") from e
    return validate(raw), compute_sha256(data)


def tensor_to_document(T: Tensor, *, format: str | None = None) -> dict:
    fmt = format or T.storage
    if fmt == "dense":
        arr = T.array()
        entries = _encode_array(arr) if T.is_complex else arr.tolist()
    elif fmt == "coo":
        entries = [
            {"idx": [i + 1 for i in index], "val": _encode_scalar(v)}
            for index, v in T.entries()
        ]
    else:
        raise TensorParseError(f"unknown tensor format {fmt!r}")
    return {"order": T.order, "dim": T.dim, "format": fmt, "entries": entries}


def dump_tensor(T: Tensor, path: str | Path | None = None, *, format: str | None = None) -> str:
    text = json.dumps(tensor_to_document(T, format=format))
    if path is not None:
        Path(path).write_text(text)
    return text


def _encode_scalar(v):
    if isinstance(v, complex):
        return [v.real, v.imag] if v.imag else v.real
    return float(v)


def _encode_array(arr: np.ndarray):
    if arr.ndim == 0:
        return _encode_scalar(complex(arr))
    return [_encode_array(a) for a in arr]


def compute_sha256(file_bytes: bytes) -> str:
    return hashlib.sha256(file_bytes).hexdigest()
