"""
Independent ground truth for the bounds and inclusion sets.

- power_rho: shifted power iteration for the spectral radius of a nonnegative
  tensor, reporting the Collatz–Wielandt interval of the iterate.
- matrix_spectrum: all eigenvalues of a small matrix from its characteristic
  polynomial.
- small_tensor_spectrum: all four eigenvalues of an order-3 dimension-2
  tensor as roots of a resultant.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from app.core.config import get_settings
from app.core.errors import ConvergenceError, PreconditionError
from app.models.tensor import Tensor, row_sums
from app.services.polyroots import aberth_roots, faddeev_leverrier, horner, relative_residual
from app.services.product import apply_vector

logger = logging.getLogger(__name__)

MATRIX_MAX_DIM = 8
RESTART_JITTER = 1e-3
RESTART_SEED = 20130101
# x_i^{m-1} below this is treated as a vanished component
VANISHING = 1e-200


@dataclass
class EigenEstimate:
    rho: float
    vector: np.ndarray
    residual: float
    cw_interval: tuple[float, float]
    iterations: int
    converged: bool
    history: list[tuple[float, float]] = field(default_factory=list)


@dataclass(frozen=True)
class SpectrumList:
    eigenvalues: np.ndarray

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues))) if len(self.eigenvalues) else 0.0

    def __len__(self) -> int:
        return len(self.eigenvalues)


def power_rho(
    A: Tensor,
    tol: float | None = None,
    max_iter: int | None = None,
    *,
    record_history: bool = False,
) -> EigenEstimate:
    """ρ(A) for nonnegative A by iterating x <- ((A+I)x)^[1/(m-1)].

    The shift adds x^[m-1] to Ax, so ρ(A+I) = ρ(A) + 1 and every component of
    the next iterate stays positive. Iteration stops once the interval is
    narrower than tol·max(1, upper end). The returned interval is the tightest
    Collatz–Wielandt enclosure seen along the way; it brackets ρ(A) for any
    nonnegative A, converged or not.
    """
    settings = get_settings()
    tol = tol if tol is not None else settings.POWER_TOL
    max_iter = max_iter if max_iter is not None else settings.POWER_MAX_ITER
    if tol <= 0:
        raise PreconditionError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise PreconditionError(f"max_iter must be at least 1, got {max_iter}")
    if not A.nonneg:
        raise PreconditionError("A is not a nonnegative tensor")
    if A.order < 2:
        raise PreconditionError(f"power iteration needs order >= 2, got {A.order}")

    m = A.order
    x = np.ones(A.dim)
    lower, upper = -np.inf, np.inf
    history: list[tuple[float, float]] = []
    restarted = False
    converged = False
    iterations = 0

    while iterations < max_iter:
        iterations += 1
        Ax = apply_vector(A, x)
        xm = x ** (m - 1)
        if not (np.all(np.isfinite(Ax)) and np.all(np.isfinite(xm))):
            raise ConvergenceError(f"non-finite values at iteration {iterations}")
        q = Ax / xm
        lo, hi = float(q.min()), float(q.max())
        lower, upper = max(lower, lo), min(upper, hi)
        if record_history:
            history.append((lo, hi))
        # relative once ρ > 1
        if hi - lo < tol * max(1.0, hi):
            converged = True
            break

        nxt = (Ax + xm) ** (1.0 / (m - 1))
        nxt = nxt / nxt.max()
        if nxt.min() ** (m - 1) < VANISHING:
            if restarted:
                logger.warning(
                    "iterate lost a component again after restart; A looks reducible, stopping at iteration %d",
                    iterations,
                )
                break
            restarted = True
            jitter = np.random.default_rng(RESTART_SEED).uniform(0, RESTART_JITTER, A.dim)
            logger.info("iterate lost a component at iteration %d; restarting with jitter", iterations)
            nxt = np.ones(A.dim) + jitter
        x = nxt

    if not converged:
        logger.info("power iteration stopped unconverged; CW interval [%g, %g]", lower, upper)

    rho = 0.5 * (lower + upper)
    residual = float(np.max(np.abs(apply_vector(A, x) - rho * x ** (m - 1))))
    return EigenEstimate(
        rho=rho,
        vector=x,
        residual=residual,
        cw_interval=(lower, upper),
        iterations=iterations,
        converged=converged,
        history=history,
    )


def matrix_spectrum(M: Tensor, *, max_sweeps: int | None = None) -> SpectrumList:
    if M.order != 2:
        raise PreconditionError(f"matrix_spectrum needs an order-2 tensor, got order {M.order}")
    if M.dim > MATRIX_MAX_DIM:
        raise PreconditionError(f"matrix_spectrum handles n <= {MATRIX_MAX_DIM}, got {M.dim}")
    coeffs = faddeev_leverrier(M.array())
    roots = aberth_roots(coeffs, max_sweeps=max_sweeps)

    norm = max(1.0, row_sums(M).max)
    p_abs = np.abs(horner(coeffs.astype(complex), roots)[0])
    limit = 1e-7 * norm ** M.dim
    if np.any(p_abs > limit):
        raise ConvergenceError(
            f"characteristic polynomial residual {p_abs.max():.3g} exceeds {limit:.3g}"
        )
    return SpectrumList(eigenvalues=_sorted(roots))


def tensor_characteristic_quartic(A: Tensor) -> np.ndarray:
    """Descending coefficients of the eigenvalue quartic of an order-3 dim-2 tensor.

    With t = x2/x1 the eigen-equations become
        p1(t) = a111 + (a112+a121) t + a122 t^2 - λ
        p2(t) = a211 + (a212+a221) t + (a222 - λ) t^2
    and their Sylvester resultant in t is a monic quartic in λ. When a122 = 0
    it carries the factor (a222 - λ) from the x1 = 0 eigenvector (0, 1).
    """
    def a(*ix: int):
        return A.entry(tuple(i - 1 for i in ix))

    lam = Polynomial([0, 1])
    f2, f1, f0 = Polynomial([a(1, 2, 2)]), Polynomial([a(1, 1, 2) + a(1, 2, 1)]), a(1, 1, 1) - lam
    g2, g1, g0 = a(2, 2, 2) - lam, Polynomial([a(2, 1, 2) + a(2, 2, 1)]), Polynomial([a(2, 1, 1)])
    res = (f2 * g0 - f0 * g2) ** 2 - (f2 * g1 - f1 * g2) * (f1 * g0 - f0 * g1)
    coef = np.zeros(5, dtype=complex)
    coef[: len(res.coef)] = res.coef[:5]
    return coef[::-1]


def small_tensor_spectrum(A: Tensor, *, max_sweeps: int | None = None) -> SpectrumList:
    if A.order != 3 or A.dim != 2:
        raise PreconditionError(
            f"small_tensor_spectrum needs order 3, dim 2; got order {A.order}, dim {A.dim}"
        )
    coeffs = tensor_characteristic_quartic(A)
    roots = aberth_roots(coeffs, max_sweeps=max_sweeps)

    rel = relative_residual(coeffs, roots)
    if np.any(rel > 1e-7):
        raise ConvergenceError(f"resultant residual {rel.max():.3g} exceeds 1e-7")

    if A.entry((0, 1, 1)) == 0:
        a222 = A.entry((1, 1, 1))
        gap = float(np.min(np.abs(roots - a222)))
        if gap > 1e-6 * (1 + abs(a222)):
            logger.warning("x1 = 0 branch: a222 = %s is not among the roots (gap %g)", a222, gap)
    return SpectrumList(eigenvalues=_sorted(roots))


def _sorted(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return z[np.lexsort((z.imag, z.real))]
