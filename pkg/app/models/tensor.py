"""
Tensor representation: order-m, dimension-n multiway arrays.

Storage is either a dense numpy array of shape (n,)*m or a coordinate list
(indices sorted lexicographically, no duplicates). Indices are 0-based here;
the JSON boundary converts from the 1-based external form exactly once.

Every operation reads tensors through `coords()`, the lexicographically
sorted list of nonzero entries, so dense and sparse copies of the same
tensor give bit-identical results.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Iterator

import numpy as np

from app.core.config import get_settings
from app.core.errors import ResourceCapError, TensorParseError

logger = logging.getLogger(__name__)


class Tensor:
    """Immutable order-m dimension-n tensor with real or complex entries."""

    def __init__(
        self,
        order: int,
        dim: int,
        *,
        dense: np.ndarray | None = None,
        indices: np.ndarray | None = None,
        values: np.ndarray | None = None,
    ):
        if order < 1:
            raise TensorParseError(f"order must be >= 1, got {order}")
        if dim < 1:
            raise TensorParseError(f"dim must be >= 1, got {dim}")
        self.order = int(order)
        self.dim = int(dim)
        self._dense = dense
        self._indices = indices
        self._values = values
        self._coords: tuple[np.ndarray, np.ndarray] | None = None
        self._lookup: dict[tuple[int, ...], complex | float] | None = None

        data = dense if dense is not None else values
        for arr in (dense, indices, values):
            if arr is not None:
                arr.setflags(write=False)
        self.is_complex = bool(np.iscomplexobj(data))
        self.nonneg = (not self.is_complex) and bool(np.all(data >= 0))

    # ── constructors ─────────────────────────────────────────────────────────

    @classmethod
    def from_dense(cls, array: Any, *, dense_cap: int | None = None) -> "Tensor":
        arr = _normalize_dtype(np.array(array))
        if arr.ndim < 1:
            raise TensorParseError("dense entries must have at least one axis")
        n = arr.shape[0]
        if any(s != n for s in arr.shape):
            raise TensorParseError(f"dense entries must be cubical, got shape {arr.shape}")
        cap = dense_cap if dense_cap is not None else get_settings().TENSOR_DENSE_CAP
        if arr.size > cap:
            raise ResourceCapError(
                f"dense tensor has {arr.size} entries, above the dense cap {cap}; use coo storage"
            )
        return cls(arr.ndim, n, dense=arr)

    @classmethod
    def from_coo(cls, indices: Any, values: Any, order: int, dim: int) -> "Tensor":
        if order < 1:
            raise TensorParseError(f"order must be >= 1, got {order}")
        if dim < 1:
            raise TensorParseError(f"dim must be >= 1, got {dim}")
        idx = np.asarray(indices, dtype=np.int64).reshape(-1, order)
        vals = _normalize_dtype(np.asarray(values).reshape(-1))
        if len(idx) != len(vals):
            raise TensorParseError("indices and values differ in length")
        if len(idx) and (idx.min() < 0 or idx.max() >= dim):
            bad = idx[np.any((idx < 0) | (idx >= dim), axis=1)][0]
            raise TensorParseError(
                f"index {tuple(int(i) + 1 for i in bad)} out of range for dim {dim}"
            )
        if len(idx):
            perm = np.lexsort(idx.T[::-1])
            idx, vals = idx[perm], vals[perm]
            dup = np.all(idx[1:] == idx[:-1], axis=1)
            if dup.any():
                first = idx[1:][dup][0]
                raise TensorParseError(
                    f"duplicate sparse index {tuple(int(i) + 1 for i in first)}"
                )
        return cls(order, dim, indices=np.ascontiguousarray(idx), values=vals)

    @classmethod
    def identity(cls, order: int, dim: int) -> "Tensor":
        idx = np.repeat(np.arange(dim, dtype=np.int64)[:, None], order, axis=1)
        return cls.from_coo(idx, np.ones(dim), order, dim)._prefer_dense()

    @classmethod
    def zeros(cls, order: int, dim: int) -> "Tensor":
        return cls.from_coo(np.empty((0, order), dtype=np.int64), np.empty(0), order, dim)._prefer_dense()

    # ── views ────────────────────────────────────────────────────────────────

    @property
    def storage(self) -> str:
        return "dense" if self._dense is not None else "coo"

    @property
    def size(self) -> int:
        """Number of entries of the full array (exact integer)."""
        return self.dim ** self.order

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(complex) if self.is_complex else np.dtype(float)

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Nonzero entries as (indices (nnz, m), values (nnz,)), lexicographic."""
        if self._coords is None:
            if self._dense is not None:
                nz = np.nonzero(self._dense)
                idx = np.stack(nz, axis=1).astype(np.int64) if nz[0].size else np.empty((0, self.order), dtype=np.int64)
                vals = self._dense[nz]
            else:
                keep = self._values != 0
                idx, vals = self._indices[keep], self._values[keep]
            idx.setflags(write=False)
            vals.setflags(write=False)
            self._coords = (idx, vals)
        return self._coords

    @property
    def nnz(self) -> int:
        return len(self.coords()[1])

    def entries(self) -> Iterator[tuple[tuple[int, ...], complex | float]]:
        idx, vals = self.coords()
        for row, v in zip(idx, vals):
            yield tuple(int(i) for i in row), v.item()

    def entry(self, index: tuple[int, ...]) -> complex | float:
        if len(index) != self.order:
            raise TensorParseError(f"index {index} has length {len(index)}, expected {self.order}")
        if self._dense is not None:
            return self._dense[tuple(index)].item()
        if self._lookup is None:
            self._lookup = dict(self.entries())
        return self._lookup.get(tuple(index), 0.0)

    def to_dense(self, *, dense_cap: int | None = None) -> "Tensor":
        if self._dense is not None:
            return self
        cap = dense_cap if dense_cap is not None else get_settings().TENSOR_DENSE_CAP
        if self.size > cap:
            raise ResourceCapError(
                f"cannot densify: {self.size} entries exceed the dense cap {cap}"
            )
        return Tensor(self.order, self.dim, dense=self.array())

    def to_sparse(self) -> "Tensor":
        idx, vals = self.coords()
        return Tensor(self.order, self.dim, indices=idx.copy(), values=vals.copy())

    def array(self) -> np.ndarray:
        """Full dense ndarray (a copy for sparse storage)."""
        if self._dense is not None:
            return self._dense
        arr = np.zeros((self.dim,) * self.order, dtype=self.dtype)
        idx, vals = self.coords()
        if len(vals):
            arr[tuple(idx.T)] = vals
        return arr

    def scale(self, alpha: complex | float) -> "Tensor":
        if self._dense is not None:
            return Tensor(self.order, self.dim, dense=_normalize_dtype(self._dense * alpha))
        idx, vals = self.coords()
        return Tensor(self.order, self.dim, indices=idx.copy(), values=_normalize_dtype(vals * alpha))

    def _prefer_dense(self) -> "Tensor":
        if self.size <= get_settings().TENSOR_DENSE_CAP:
            return self.to_dense()
        return self

    def __repr__(self) -> str:
        kind = "complex" if self.is_complex else "real"
        return f"Tensor(order={self.order}, dim={self.dim}, {self.storage}, nnz={self.nnz}, {kind})"


def _normalize_dtype(arr: np.ndarray) -> np.ndarray:
    """Cast to float64, or complex128 when some imaginary part is nonzero."""
    if np.iscomplexobj(arr):
        if np.all(arr.imag == 0):
            return np.ascontiguousarray(arr.real, dtype=np.float64)
        return np.ascontiguousarray(arr, dtype=np.complex128)
    try:
        return np.ascontiguousarray(arr, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise TensorParseError(f"entries are not numeric: {e}") from e


# ── derived quantities ───────────────────────────────────────────────────────

@dataclass(frozen=True)
class RowSumProfile:
    values: np.ndarray
    min: float
    max: float

    @classmethod
    def from_values(cls, values: np.ndarray) -> "RowSumProfile":
        values = np.asarray(values, dtype=np.float64)
        values.setflags(write=False)
        return cls(values=values, min=float(values.min()), max=float(values.max()))

    @property
    def argmin(self) -> int:
        return int(np.argmin(self.values))

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.values))


@dataclass(frozen=True)
class DiagonalVector:
    entries: np.ndarray

    def __len__(self) -> int:
        return len(self.entries)


def row_sums(A: Tensor) -> RowSumProfile:
    """r_i(A) = sum over (i2..im) of |a_{i i2..im}|, with complex modulus."""
    idx, vals = A.coords()
    out = np.zeros(A.dim)
    np.add.at(out, idx[:, 0], np.abs(vals))
    return RowSumProfile.from_values(out)


def diagonal(A: Tensor) -> DiagonalVector:
    entries = np.array([A.entry((i,) * A.order) for i in range(A.dim)], dtype=A.dtype)
    return DiagonalVector(entries=entries)


def validate(raw: Any) -> Tensor:
    """Build a Tensor from the JSON document form (1-based indices)."""
    from pydantic import ValidationError
    from app.api.schemas import TensorDocument

    try:
        doc = raw if isinstance(raw, TensorDocument) else TensorDocument.model_validate(raw)
    except ValidationError as e:
        raise TensorParseError(f"malformed tensor document: {e.errors()[0]['msg']}") from e

    m, n = doc.order, doc.dim
    if m < 1:
        raise TensorParseError(f"order must be >= 1, got {m}")
    if n < 1:
        raise TensorParseError(f"dim must be >= 1, got {n}")

    if doc.format == "dense":
        arr = _dense_entries(doc.entries, m)
        if arr.shape != (n,) * m:
            raise TensorParseError(f"dense entries have shape {arr.shape}, expected {(n,) * m}")
        return Tensor.from_dense(arr)

    idx = np.empty((len(doc.entries), m), dtype=np.int64)
    vals = np.empty(len(doc.entries), dtype=np.complex128)
    for row, item in enumerate(doc.entries):
        if not isinstance(item, dict) or "idx" not in item or "val" not in item:
            raise TensorParseError(f"coo entry {row} must be an object with idx and val")
        index = item["idx"]
        if not isinstance(index, list) or len(index) != m:
            raise TensorParseError(f"coo entry {row}: idx must have length {m}")
        for i in index:
            if not isinstance(i, int) or isinstance(i, bool) or i < 1 or i > n:
                raise TensorParseError(f"index {tuple(index)} out of range for dim {n}")
        idx[row] = [i - 1 for i in index]
        vals[row] = _scalar(item["val"])
    return Tensor.from_coo(idx, vals, m, n)


def _scalar(v: Any) -> complex:
    if isinstance(v, bool):
        raise TensorParseError(f"invalid scalar {v!r}")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in v
    ):
        return complex(v[0], v[1])
    raise TensorParseError(f"invalid scalar {v!r}; expected a number or [re, im]")


def _dense_entries(node: Any, depth: int) -> np.ndarray:
    if depth == 0:
        return np.asarray(_scalar(node))
    if not isinstance(node, list):
        raise TensorParseError("dense entries nest shallower than the declared order")
    parts = [_dense_entries(child, depth - 1) for child in node]
    if not parts:
        raise TensorParseError("dense entries contain an empty axis")
    if any(p.shape != parts[0].shape for p in parts):
        raise TensorParseError("dense entries are ragged")
    return np.stack(parts)
