"""
Polynomial helpers for the spectrum oracles: characteristic polynomial
coefficients (Faddeev–LeVerrier), simultaneous root finding (Aberth–Ehrlich)
and Newton polishing. Coefficients are in descending order throughout.
"""
import logging
import math

import numpy as np

from app.core.config import get_settings
from app.core.errors import ConvergenceError

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps
CLUSTER_SPREAD = 4.0


def faddeev_leverrier(M: np.ndarray) -> np.ndarray:
    """Coefficients of det(λI - M), monic, descending."""
    n = M.shape[0]
    dtype = np.result_type(M.dtype, np.float64)
    coeffs = np.zeros(n + 1, dtype=dtype)
    coeffs[0] = 1.0
    I = np.eye(n, dtype=dtype)
    Mk = np.zeros((n, n), dtype=dtype)
    for k in range(1, n + 1):
        Mk = M @ Mk + coeffs[k - 1] * I
        coeffs[k] = -np.trace(M @ Mk) / k
    return coeffs


def horner(coeffs: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """p(z) and p'(z) for every point of z."""
    p = np.full(np.shape(z), coeffs[0], dtype=complex)
    dp = np.zeros(np.shape(z), dtype=complex)
    for c in coeffs[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def rounding_level(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Size of the floating-point noise in evaluating p at z."""
    absz = np.abs(z)
    acc = np.full(np.shape(z), abs(coeffs[0]))
    for c in coeffs[1:]:
        acc = acc * absz + abs(c)
    return 8 * EPS * acc


def aberth_roots(coeffs, *, max_sweeps: int | None = None) -> np.ndarray:
    """All roots of the polynomial with descending coefficients `coeffs`."""
    max_sweeps = max_sweeps if max_sweeps is not None else get_settings().ABERTH_MAX_SWEEPS
    c = np.trim_zeros(np.asarray(coeffs, dtype=complex), "f")
    if len(c) <= 1:
        return np.empty(0, dtype=complex)
    c = c / c[0]

    # zero roots are exact; strip them before iterating
    zeros = len(c) - len(np.trim_zeros(c, "b"))
    c = np.trim_zeros(c, "b")
    deg = len(c) - 1
    if deg == 0:
        return np.zeros(zeros, dtype=complex)

    radius = 1 + np.max(np.abs(c[1:]))
    z = radius * np.exp(1j * (2 * np.pi * np.arange(deg) / deg + 0.4))

    for sweep in range(max_sweeps):
        p, dp = horner(c, z)
        settled = np.abs(p) <= rounding_level(c, z)
        if settled.all():
            logger.debug("aberth converged after %d sweeps", sweep)
            break
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        diff[diff == 0] = EPS
        repulsion = np.sum(1.0 / diff, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dp != 0, p / dp, p)
            step = ratio / (1 - ratio * repulsion)
        step = np.where(settled | ~np.isfinite(step), 0, step)
        z = z - step
        if np.max(np.abs(step)) <= 4 * EPS * max(1.0, np.max(np.abs(z))):
            break
    else:
        raise ConvergenceError(f"root finder did not converge in {max_sweeps} sweeps")

    z = merge_clusters(c, polish(c, z))
    return np.concatenate([z, np.zeros(zeros, dtype=complex)])


def polish(coeffs: np.ndarray, roots: np.ndarray, steps: int = 5) -> np.ndarray:
    """Newton steps, each accepted only where it lowers |p|."""
    z = np.asarray(roots, dtype=complex).copy()
    p, dp = horner(coeffs, z)
    for _ in range(steps):
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = np.where(dp != 0, z - p / dp, z)
        cp, cdp = horner(coeffs, cand)
        better = np.isfinite(cand) & (np.abs(cp) < np.abs(p))
        z = np.where(better, cand, z)
        p = np.where(better, cp, p)
        dp = np.where(better, cdp, dp)
    return z


def cluster_radius(coeffs: np.ndarray, center: complex, k: int) -> float:
    """Radius to which rounding smears a k-fold root at `center`.

    Near such a root p(z) ≈ p^(k)(c)/k! · (z - c)^k, so |p| drops to the
    rounding level within (rounding / |p^(k)(c)/k!|)^(1/k) of c.
    """
    at = np.array([center])
    lead = abs(horner(np.polyder(coeffs, k), at)[0][0]) / math.factorial(k)
    if lead == 0:
        return 0.0
    return float((rounding_level(coeffs, at)[0] / lead) ** (1.0 / k))


def merge_clusters(coeffs: np.ndarray, roots: np.ndarray) -> np.ndarray:
    """Replace each cluster of approximations to one multiple root by its mean.

    A k-fold root comes back from simultaneous iteration as k points spread
    over `cluster_radius`; their mean is accurate to about eps. For every
    unmerged root the k nearest unmerged roots, largest k first, form a
    cluster when their spread is within CLUSTER_SPREAD radii and |p| at the
    mean stays within the members' residual or the rounding level.
    """
    z = np.asarray(roots, dtype=complex).copy()
    p_abs = np.abs(horner(coeffs, z)[0])
    merged = np.zeros(len(z), dtype=bool)
    for i in range(len(z)):
        if merged[i]:
            continue
        free = np.flatnonzero(~merged)
        nearest = free[np.argsort(np.abs(z[free] - z[i]), kind="stable")]
        for k in range(len(nearest), 1, -1):
            group = nearest[:k]
            center = z[group].mean()
            spread = np.max(np.abs(z[group] - center))
            if spread > CLUSTER_SPREAD * cluster_radius(coeffs, center, k):
                continue
            at = np.array([center])
            if abs(horner(coeffs, at)[0][0]) > max(p_abs[group].max(), rounding_level(coeffs, at)[0]):
                continue
            logger.debug("merged %d roots near %s (spread %.3g)", k, center, spread)
            z[group] = center
            merged[group] = True
            break
    return z


def relative_residual(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """|p(z)| relative to the magnitude of the terms summed to get it."""
    p, _ = horner(np.asarray(coeffs, dtype=complex), z)
    absz = np.abs(z)
    scale = np.zeros(np.shape(z))
    for c in coeffs:
        scale = scale * absz + abs(c)
    return np.abs(p) / np.maximum(scale, EPS)
