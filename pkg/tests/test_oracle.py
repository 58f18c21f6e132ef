import numpy as np
import pytest

from app.core.errors import ConvergenceError, PreconditionError
from app.models.tensor import Tensor
from app.services.oracle import (
    matrix_spectrum,
    power_rho,
    small_tensor_spectrum,
    tensor_characteristic_quartic,
)
from app.services.polyroots import aberth_roots, faddeev_leverrier
from tests.conftest import random_nonneg


def test_power_rho_example(example33):
    est = power_rho(example33)
    assert est.converged
    assert 621 / 81 <= est.rho <= 417 / 49
    lo, hi = est.cw_interval
    assert hi - lo < 1e-10 * hi
    assert est.residual < 1e-8


def test_power_rho_identity():
    est = power_rho(Tensor.identity(3, 3))
    assert est.converged
    assert est.rho == pytest.approx(1.0, abs=1e-12)


def test_power_rho_matches_perron_root(rng):
    M = rng.uniform(0.1, 1.0, size=(5, 5))
    est = power_rho(Tensor.from_dense(M))
    assert est.rho == pytest.approx(max(abs(np.linalg.eigvals(M))), rel=1e-9)


def test_power_rho_reducible_is_reported_not_raised():
    est = power_rho(Tensor.from_dense([[2.0, 1.0], [0.0, 1.0]]), max_iter=2000)
    assert not est.converged
    lo, hi = est.cw_interval
    assert np.isfinite(lo) and np.isfinite(hi)
    assert lo <= 2.0 <= hi


def test_power_rho_history(example33):
    est = power_rho(example33, record_history=True)
    assert len(est.history) == est.iterations
    # the bracket never loosens
    lows = [lo for lo, _ in est.history]
    assert max(lows) <= est.cw_interval[0] + 1e-15


def test_every_iterate_brackets_rho(example33, rng):
    tensors = [example33] + [random_nonneg(rng, m, 3, sparse=bool(m % 2)) for m in (2, 3, 4)]
    for A in tensors:
        rho = power_rho(A, tol=1e-13).rho
        est = power_rho(A, record_history=True)
        for lo, hi in est.history:
            assert lo <= rho * (1 + 1e-12)
            assert rho * (1 - 1e-12) <= hi


def test_power_rho_large_radius_converges(rng):
    # ρ of order 1e6: one ulp is wider than the default tol
    A = random_nonneg(rng, 3, 3)
    est = power_rho(A.scale(1e6))
    assert est.converged
    assert est.rho == pytest.approx(1e6 * power_rho(A).rho, rel=1e-9)


def test_shift_consistency(rng):
    tol = 1e-10
    for m in (2, 3, 4):
        A = random_nonneg(rng, m, 3)
        shifted = Tensor.from_dense(A.array() + Tensor.identity(m, 3).array())
        rho, rho_shift = power_rho(A, tol).rho, power_rho(shifted, tol).rho
        assert abs(rho + 1 - rho_shift) <= 2 * tol * max(1.0, rho_shift)


def test_power_rho_rejects_zero_iterations(example33):
    with pytest.raises(PreconditionError, match="max_iter"):
        power_rho(example33, max_iter=0)


def test_power_rho_rejects_signed():
    with pytest.raises(PreconditionError):
        power_rho(Tensor.from_dense([[1.0, -1.0], [1.0, 1.0]]))


def test_faddeev_leverrier_matches_numpy(rng):
    M = rng.normal(size=(5, 5))
    np.testing.assert_allclose(faddeev_leverrier(M), np.poly(M), rtol=1e-9, atol=1e-9)


def test_aberth_simple_roots():
    roots = aberth_roots([1, -6, 11, -6])
    np.testing.assert_allclose(np.sort(roots.real), [1, 2, 3], atol=1e-12)


def test_aberth_zero_roots_stripped():
    roots = aberth_roots([1, -1, 0, 0])
    assert sorted(np.round(roots.real, 12)) == [0.0, 0.0, 1.0]


def test_aberth_sweep_cap():
    with pytest.raises(ConvergenceError):
        aberth_roots([1, 0, 0, 0, 0, 0, -1], max_sweeps=1)


def test_matrix_spectrum_matches_numpy(rng):
    M = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    spec = matrix_spectrum(Tensor.from_dense(M))
    expected = np.linalg.eigvals(M)
    for z in expected:
        assert np.min(np.abs(spec.eigenvalues - z)) < 1e-7
    assert len(spec) == 6


def test_matrix_spectrum_identity_triple_root():
    spec = matrix_spectrum(Tensor.identity(2, 3))
    np.testing.assert_allclose(spec.eigenvalues, [1, 1, 1], atol=1e-10)


def test_matrix_spectrum_swap():
    spec = matrix_spectrum(Tensor.from_dense([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(spec.eigenvalues, [-1, 1], atol=1e-12)


def test_aberth_merges_double_roots():
    # (z - 1)^2 (z - 2)
    roots = np.sort_complex(aberth_roots([1, -4, 5, -2]))
    np.testing.assert_allclose(roots, [1, 1, 2], atol=1e-10)


def test_matrix_spectrum_limits():
    with pytest.raises(PreconditionError):
        matrix_spectrum(Tensor.identity(2, 9))
    with pytest.raises(PreconditionError):
        matrix_spectrum(Tensor.identity(3, 2))


def test_diagonal_tensor_spectrum():
    A = Tensor.from_coo([[0, 0, 0], [1, 1, 1]], [2.0, 5.0], 3, 2)
    spec = small_tensor_spectrum(A)
    np.testing.assert_allclose(np.sort(spec.eigenvalues.real), [2, 2, 5, 5], atol=1e-10)
    assert spec.spectral_radius == pytest.approx(5.0, abs=1e-6)


def test_quartic_is_monic(example33):
    coeffs = tensor_characteristic_quartic(example33)
    assert coeffs[0] == 1


def test_small_tensor_spectrum_radius_matches_power(example33):
    spec = small_tensor_spectrum(example33)
    assert len(spec) == 4
    assert spec.spectral_radius == pytest.approx(power_rho(example33).rho, abs=1e-6)


def test_small_tensor_eigenpairs_satisfy_equations(rng):
    A = Tensor.from_dense(rng.normal(size=(2, 2, 2)))
    a = A.array()
    for lam in small_tensor_spectrum(A).eigenvalues:
        # with x = (1, t): the first equation gives a quadratic in t; some root also solves the second
        p = np.poly1d([a[0, 1, 1], a[0, 0, 1] + a[0, 1, 0], a[0, 0, 0] - lam])
        q = np.poly1d([a[1, 1, 1] - lam, a[1, 0, 1] + a[1, 1, 0], a[1, 0, 0]])
        assert min(abs(q(t)) for t in p.roots) < 1e-5 * (1 + abs(lam)) ** 2
