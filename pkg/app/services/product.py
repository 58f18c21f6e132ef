"""
General tensor product AB, tensor powers, diagonal similarity and the
non-materializing row-sum formula.

AB for A of order m and B of order k (same dim n) has order (m-1)(k-1)+1:
    c[i, α1, ..., α_{m-1}] = Σ a[i, i2, ..., im] b[i2, α1] ... b[im, α_{m-1}]
with each α_j ∈ [n]^{k-1}. The number of entries is exponential in m·k, so
bounds go through `product_row_sums` and materialization is reserved for
oracles and small instances.
"""
from __future__ import annotations

import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from app.core.config import get_settings
from app.core.errors import PreconditionError, ResourceCapError
from app.models.tensor import RowSumProfile, Tensor, row_sums

logger = logging.getLogger(__name__)

INT64_MAX = 2 ** 63 - 1


@dataclass(frozen=True)
class ProductShape:
    left_order: int
    right_order: int
    dim: int

    @property
    def result_order(self) -> int:
        return (self.left_order - 1) * (self.right_order - 1) + 1

    @property
    def result_size(self) -> int:
        return self.dim ** self.result_order

    @classmethod
    def of(cls, A: Tensor, B: Tensor) -> "ProductShape":
        if A.dim != B.dim:
            raise PreconditionError(f"dimension mismatch: A has dim {A.dim}, B has dim {B.dim}")
        if A.order < 2:
            raise PreconditionError(f"left factor must have order >= 2, got {A.order}")
        return cls(A.order, B.order, A.dim)


def general_product(
    A: Tensor,
    B: Tensor,
    *,
    entry_cap: int | None = None,
    dense_cap: int | None = None,
) -> Tensor:
    shape = ProductShape.of(A, B)
    settings = get_settings()
    entry_cap = entry_cap if entry_cap is not None else settings.TENSOR_ENTRY_CAP
    dense_cap = dense_cap if dense_cap is not None else settings.TENSOR_DENSE_CAP

    if max(shape.result_size, A.size, B.size) <= dense_cap:
        logger.debug("dense product path: order %d, %d entries", shape.result_order, shape.result_size)
        return _dense_product(A, B, shape)

    bound = _sparse_nnz_bound(A, B)
    if bound > entry_cap:
        raise ResourceCapError(
            f"product of order {shape.result_order} may hold {bound} nonzeros, "
            f"above the entry cap {entry_cap}"
        )
    logger.debug("sparse product path: order %d, at most %d nonzeros", shape.result_order, bound)
    return _sparse_product(A, B, shape)


def _dense_product(A: Tensor, B: Tensor, shape: ProductShape) -> Tensor:
    n = shape.dim
    width = n ** (shape.right_order - 1)
    Bm = B.array().reshape(n, width)
    T = A.array()
    # Contracting axis 1 each time appends α1, α2, ... in order.
    for _ in range(shape.left_order - 1):
        T = np.tensordot(T, Bm, axes=([1], [0]))
    C = T.reshape((n,) * shape.result_order)
    return Tensor.from_dense(C, dense_cap=max(C.size, 1))


def _b_rows(B: Tensor) -> dict[int, list[tuple[tuple[int, ...], complex | float]]]:
    rows: dict[int, list] = defaultdict(list)
    for index, v in B.entries():
        rows[index[0]].append((index[1:], v))
    return rows


def _sparse_nnz_bound(A: Tensor, B: Tensor) -> int:
    counts = [0] * B.dim
    for r, items in _b_rows(B).items():
        counts[r] = len(items)
    idx, _ = A.coords()
    return sum(math.prod(counts[j] for j in row[1:]) for row in idx.tolist())


def _sparse_product(A: Tensor, B: Tensor, shape: ProductShape) -> Tensor:
    rows = _b_rows(B)
    acc: dict[tuple[int, ...], complex | float] = defaultdict(float)
    for index, a in A.entries():
        slots = [rows.get(j, []) for j in index[1:]]
        if any(not s for s in slots):
            continue
        for choice in itertools.product(*slots):
            key = (index[0],) + tuple(itertools.chain.from_iterable(alpha for alpha, _ in choice))
            acc[key] += a * math.prod(b for _, b in choice)
    keys = sorted(acc)
    idx = np.array(keys, dtype=np.int64).reshape(-1, shape.result_order)
    vals = np.array([acc[k] for k in keys])
    return Tensor.from_coo(idx, vals, shape.result_order, shape.dim)


def apply_vector(A: Tensor, x) -> np.ndarray:
    """(A x^{m-1})_i = Σ a[i, i2..im] x[i2] ... x[im]."""
    x = np.asarray(x)
    if x.shape != (A.dim,):
        raise PreconditionError(f"vector has length {x.size}, expected {A.dim}")
    idx, vals = A.coords()
    dtype = np.result_type(vals.dtype, x.dtype, np.float64)
    terms = vals * np.prod(x[idx[:, 1:]], axis=1)
    out = np.zeros(A.dim, dtype=dtype)
    np.add.at(out, idx[:, 0], terms)
    return out


def tensor_power(A: Tensor, k: int, *, entry_cap: int | None = None) -> Tensor:
    """A^k with A^{j+1} = A (A^j); order (m-1)^k + 1."""
    if A.order < 2:
        raise PreconditionError(f"tensor powers need order >= 2, got {A.order}")
    if k < 1:
        raise PreconditionError(f"power must be a positive integer, got {k}")
    P = A
    for _ in range(k - 1):
        P = general_product(A, P, entry_cap=entry_cap)
    return P


def _require_nonneg(**tensors: Tensor) -> None:
    for name, T in tensors.items():
        if not T.nonneg:
            raise PreconditionError(f"{name} is not a nonnegative tensor")


def product_row_sums(A: Tensor, B: Tensor) -> RowSumProfile:
    """r_i(AB) = Σ a[i, i2..im] r_{i2}(B) ... r_{im}(B), for nonnegative A, B."""
    ProductShape.of(A, B)
    _require_nonneg(A=A, B=B)
    return RowSumProfile.from_values(apply_vector(A, row_sums(B).values))


def power_row_sums(A: Tensor, k: int, *, normalize: bool = False) -> np.ndarray:
    """r(A^k) by the recursion r(A^{j+1}) = A r(A^j).

    With normalize=True each step is rescaled to max 1; the result is then
    r(A^k) up to a positive factor, which is all the scale-invariant
    quotients need and keeps large k finite.
    """
    if A.order < 2:
        raise PreconditionError(f"tensor powers need order >= 2, got {A.order}")
    if k < 1:
        raise PreconditionError(f"power must be a positive integer, got {k}")
    _require_nonneg(A=A)
    r = row_sums(A).values
    for _ in range(k - 1):
        if normalize and r.max() > 0:
            r = r / r.max()
        r = apply_vector(A, r)
    if normalize and r.max() > 0:
        r = r / r.max()
    return r


def product_row_sum_bound(A: Tensor, B: Tensor) -> np.ndarray:
    """r_i(A) R(B)^{m-1}; dominates r_i(AB) for arbitrary complex A, B."""
    ProductShape.of(A, B)
    return row_sums(A).values * row_sums(B).max ** (A.order - 1)


def product_diagonal(A: Tensor, B: Tensor) -> np.ndarray:
    """Diagonal c_{i..i} of AB without materializing it.

    c_i = Σ a[i, i2..im] b[i2, i..i] ... b[im, i..i]
    """
    ProductShape.of(A, B)
    n = A.dim
    # Bd[r, i] = b[r, i, ..., i]
    Bd = np.array(
        [[B.entry((r,) + (i,) * (B.order - 1)) for i in range(n)] for r in range(n)],
        dtype=B.dtype,
    )
    idx, vals = A.coords()
    rows = idx[:, 0]
    terms = vals * np.prod(Bd[idx[:, 1:], rows[:, None]], axis=1)
    out = np.zeros(n, dtype=np.result_type(vals.dtype, Bd.dtype))
    np.add.at(out, rows, terms)
    return out


def diagonal_similarity(A: Tensor, d) -> Tensor:
    """D^{-(m-1)} A D: entries d[i1]^{-(m-1)} a[i1..im] d[i2] ... d[im]."""
    d = np.asarray(d, dtype=np.float64)
    if d.shape != (A.dim,):
        raise PreconditionError(f"scaling vector has length {d.size}, expected {A.dim}")
    if np.any(d <= 0):
        j = int(np.argmax(d <= 0))
        raise PreconditionError(f"d_{j + 1} = {d[j]} is not positive")
    idx, vals = A.coords()
    factor = d[idx[:, 0]] ** (-(A.order - 1)) * np.prod(d[idx[:, 1:]], axis=1)
    scaled = Tensor.from_coo(idx, vals * factor, A.order, A.dim)
    return scaled.to_dense() if A.storage == "dense" else scaled


def mu_k(m: int, k: int) -> int:
    """Row-sum growth exponent of A^k: ((m-1)^k - 1)/(m-2), or k when m = 2."""
    if m < 2:
        raise PreconditionError(f"mu_k needs order >= 2, got {m}")
    if k < 1:
        raise PreconditionError(f"power must be a positive integer, got {k}")
    mu = k if m == 2 else ((m - 1) ** k - 1) // (m - 2)
    if mu > INT64_MAX:
        raise ResourceCapError(f"mu_k = {mu} exceeds 2^63-1 for m={m}, k={k}")
    return mu
