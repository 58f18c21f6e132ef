"""
Spectral-radius bounds for nonnegative tensors and their products.

    rowsum_bounds        r(A) <= ρ(A) <= R(A)
    minc_bounds          min/max of r_i(AB) / r_i(B)^{m-1} enclose ρ(A)
    minc_self            B = A
    minc_power           B = A^k
    vector_bounds        B = x, a positive vector (Collatz–Wielandt quotients)
    product_rho_bounds   r(A) r(B)^{m-1} <= ρ(AB) <= R(A) R(B)^{m-1}
    power_rho_bounds     r(A)^{μ_k} <= ρ(A^k) <= R(A)^{μ_k}
    cw_certificate       B built from the Perron vector; its gap shrinks to 0

Row sums of products always come from the row-sum formula, never from a
materialized product.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from app.core.errors import ConvergenceError, PreconditionError, ResourceCapError
from app.models.tensor import Tensor, row_sums
from app.services.oracle import EigenEstimate, power_rho
from app.services.product import (
    ProductShape,
    apply_vector,
    mu_k,
    power_row_sums,
    product_row_sums,
)

logger = logging.getLogger(__name__)

# rational endpoints are only computed for inputs up to this many nonzeros
EXACT_MAX_NNZ = 100_000
# and for minc_power only while r(A^k) fits in this many bits
EXACT_MAX_BITS = 4096


@dataclass(frozen=True)
class BoundInterval:
    lower: float
    upper: float
    method: str
    witness_index_low: int   # 1-based row attaining the lower end
    witness_index_high: int
    exact: tuple[Fraction, Fraction] | None = None
    # unreduced (numerator, denominator) of each exact endpoint
    exact_terms: tuple[tuple[int, int], tuple[int, int]] | None = None

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def exact_strings(self) -> tuple[str, str] | None:
        """Endpoints as "p/q" with r_i(AB) over r_i(B)^{m-1}, not reduced."""
        if self.exact_terms is None:
            return None
        (p0, q0), (p1, q1) = self.exact_terms
        return f"{p0}/{q0}", f"{p1}/{q1}"


@dataclass(frozen=True)
class CWCertificate:
    B: Tensor
    gap: float
    interval: BoundInterval
    estimate: EigenEstimate


def _require_nonneg(**tensors: Tensor) -> None:
    for name, T in tensors.items():
        if not T.nonneg:
            raise PreconditionError(f"{name} is not a nonnegative tensor")


def _require_positive_rows(r: np.ndarray, label: str) -> None:
    zero = np.flatnonzero(r <= 0)
    if len(zero):
        raise PreconditionError(f"r_{zero[0] + 1}({label}) = 0")


def _interval(q: np.ndarray, method: str, terms: list[tuple[int, int]] | None = None) -> BoundInterval:
    lo, hi = int(np.argmin(q)), int(np.argmax(q))
    exact = exact_terms = None
    if terms is not None:
        fractions = [Fraction(p, d) for p, d in terms]
        lo = min(range(len(fractions)), key=fractions.__getitem__)
        hi = max(range(len(fractions)), key=fractions.__getitem__)
        exact = (fractions[lo], fractions[hi])
        exact_terms = (terms[lo], terms[hi])
        lower, upper = float(exact[0]), float(exact[1])
    else:
        lower, upper = float(q[lo]), float(q[hi])
    if not (math.isfinite(lower) and math.isfinite(upper)):
        raise ResourceCapError(f"{method} bound is not finite in double precision")
    return BoundInterval(lower, upper, method, lo + 1, hi + 1, exact, exact_terms)


def _is_integral(T: Tensor) -> bool:
    _, vals = T.coords()
    return (not T.is_complex) and bool(np.all(np.mod(vals, 1) == 0))


def _exact_feasible(A: Tensor, B: Tensor) -> bool:
    return A.nnz + B.nnz <= EXACT_MAX_NNZ and _is_integral(A) and _is_integral(B)


def _exact_row_sums(T: Tensor) -> list[int]:
    r = [0] * T.dim
    for index, v in T.entries():
        r[index[0]] += int(v)
    return r


def _exact_apply(A: Tensor, x: list[int]) -> list[int]:
    out = [0] * A.dim
    for index, v in A.entries():
        out[index[0]] += int(v) * math.prod(x[j] for j in index[1:])
    return out


def _exact_terms(A: Tensor, rb: list[int]) -> list[tuple[int, int]]:
    """(r_i(AB), r_i(B)^{m-1}) per row, given r(B) as integers."""
    rab = _exact_apply(A, rb)
    return [(rab[i], rb[i] ** (A.order - 1)) for i in range(A.dim)]


def rowsum_bounds(A: Tensor) -> BoundInterval:
    _require_nonneg(A=A)
    return _interval(row_sums(A).values, "rowsum")


def minc_bounds(A: Tensor, B: Tensor, *, labels: tuple[str, str] = ("A", "B"), method: str = "minc") -> BoundInterval:
    ProductShape.of(A, B)
    _require_nonneg(**{labels[0]: A, labels[1]: B})
    rb = row_sums(B).values
    _require_positive_rows(rb, labels[1])
    rab = product_row_sums(A, B).values
    q = rab / rb ** (A.order - 1)
    terms = _exact_terms(A, _exact_row_sums(B)) if _exact_feasible(A, B) else None
    return _interval(q, method, terms)


def minc_self(A: Tensor) -> BoundInterval:
    _require_nonneg(A=A)
    if A.order < 2:
        raise PreconditionError(f"minc bounds need order >= 2, got {A.order}")
    return minc_bounds(A, A, labels=("A", "A"), method="minc_self")


def minc_power(A: Tensor, k: int) -> BoundInterval:
    """Quotients r_i(A^{k+1}) / r_i(A^k)^{m-1}, both from the row-sum recursion."""
    _require_nonneg(A=A)
    if A.order < 2:
        raise PreconditionError(f"minc bounds need order >= 2, got {A.order}")
    _require_positive_rows(row_sums(A).values, "A")
    # r(A^k) is normalized; the quotient is invariant under rescaling it
    rk = power_row_sums(A, k, normalize=True)
    rk1 = apply_vector(A, rk)
    return _interval(rk1 / rk ** (A.order - 1), "minc_power", _exact_power_terms(A, k))


def _exact_power_terms(A: Tensor, k: int) -> list[tuple[int, int]] | None:
    if not _exact_feasible(A, A):
        return None
    rk = _exact_row_sums(A)
    for _ in range(k - 1):
        rk = _exact_apply(A, rk)
        if max(rk).bit_length() > EXACT_MAX_BITS:
            logger.debug("exact r(A^k) passed %d bits; reporting floats only", EXACT_MAX_BITS)
            return None
    return _exact_terms(A, rk)


def vector_bounds(A: Tensor, x) -> BoundInterval:
    """min/max of (Ax)_i / x_i^{m-1} for a positive vector x."""
    _require_nonneg(A=A)
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0):
        raise PreconditionError("x must be a positive vector")
    return _interval(apply_vector(A, x) / x ** (A.order - 1), "collatz_wielandt")


def product_rho_bounds(A: Tensor, B: Tensor) -> BoundInterval:
    ProductShape.of(A, B)
    _require_nonneg(A=A, B=B)
    ra, rb = row_sums(A), row_sums(B)
    e = A.order - 1
    lower, upper = ra.min * rb.min ** e, ra.max * rb.max ** e
    return BoundInterval(lower, upper, "product", ra.argmin + 1, ra.argmax + 1)


def power_rho_bounds(A: Tensor, k: int) -> BoundInterval:
    """ρ(A^k) <= R(A)^{μ_k}; for nonnegative A also r(A)^{μ_k} <= ρ(A^k)."""
    mu = mu_k(A.order, k)
    r = row_sums(A)
    try:
        upper = math.pow(r.max, mu)
        lower = math.pow(r.min, mu) if A.nonneg else 0.0
    except OverflowError as e:
        raise ResourceCapError(f"R(A)^{mu} overflows double precision") from e
    return BoundInterval(lower, upper, "power", r.argmin + 1, r.argmax + 1)


def cw_certificate(A: Tensor, k: int, tol: float | None = None, *, max_iter: int | None = None) -> CWCertificate:
    """Order-k B with r_i(B) = x_i for the Perron vector x of A.

    All row mass sits on the entry b[i, 1, ..., 1]. The minc quotients of
    (A, B) are then the Collatz–Wielandt quotients of x, so the gap closes as
    the oracle converges.
    """
    from app.services.inclusion import weakly_irreducible_standard

    _require_nonneg(A=A)
    if k < 1:
        raise PreconditionError(f"k must be a positive integer, got {k}")
    if not weakly_irreducible_standard(A):
        raise PreconditionError("A is not weakly irreducible")
    est = power_rho(A, tol, max_iter)
    if not est.converged:
        raise ConvergenceError(
            f"power iteration did not converge in {est.iterations} iterations "
            f"(CW interval [{est.cw_interval[0]}, {est.cw_interval[1]}])"
        )
    x = est.vector
    idx = np.zeros((A.dim, k), dtype=np.int64)
    idx[:, 0] = np.arange(A.dim)
    B = Tensor.from_coo(idx, x, k, A.dim)
    interval = minc_bounds(A, B, method="collatz_wielandt_certificate")
    logger.debug("cw certificate: k=%d gap=%g after %d iterations", k, interval.width, est.iterations)
    return CWCertificate(B=B, gap=interval.width, interval=interval, estimate=est)
