import itertools

import numpy as np
import pytest

from app.core.errors import PreconditionError, ResourceCapError
from app.models.tensor import Tensor, row_sums
from app.services.product import (
    ProductShape,
    apply_vector,
    diagonal_similarity,
    general_product,
    mu_k,
    power_row_sums,
    product_diagonal,
    product_row_sum_bound,
    product_row_sums,
    tensor_power,
)
from tests.conftest import random_nonneg


def test_matrix_product_is_matmul(rng):
    A = rng.normal(size=(4, 4))
    B = rng.normal(size=(4, 4))
    C = general_product(Tensor.from_dense(A), Tensor.from_dense(B))
    np.testing.assert_allclose(C.array(), A @ B)


def test_matrix_times_vector(rng):
    A = rng.normal(size=(3, 3))
    x = rng.normal(size=3)
    C = general_product(Tensor.from_dense(A), Tensor.from_dense(x))
    assert C.order == 1
    np.testing.assert_allclose(C.array(), A @ x)


def test_tensor_times_vector_is_apply_vector(example33):
    x = np.array([0.3, 1.7])
    C = general_product(example33, Tensor.from_dense(x))
    np.testing.assert_allclose(C.array(), apply_vector(example33, x))


def test_result_order():
    assert ProductShape(3, 3, 2).result_order == 5
    assert ProductShape(4, 2, 2).result_order == 4
    assert ProductShape(2, 5, 2).result_order == 5


def test_identity_is_neutral(example33):
    I = Tensor.identity(2, 2)
    np.testing.assert_array_equal(general_product(I, example33).array(), example33.array())
    np.testing.assert_array_equal(general_product(example33, I).array(), example33.array())


def test_dense_and_sparse_paths_agree(rng):
    A = random_nonneg(rng, 3, 3, sparse=True)
    B = random_nonneg(rng, 3, 3, sparse=True)
    dense = general_product(A, B)
    sparse = general_product(A, B, dense_cap=1)
    assert sparse.storage == "coo"
    np.testing.assert_allclose(sparse.array(), dense.array(), rtol=1e-14)


def test_associativity(rng):
    A, B, C = (Tensor.from_dense(rng.normal(size=(2, 2, 2))) for _ in range(3))
    left = general_product(general_product(A, B), C)
    right = general_product(A, general_product(B, C))
    np.testing.assert_allclose(left.array(), right.array(), rtol=1e-12, atol=1e-12)


def test_dimension_mismatch():
    with pytest.raises(PreconditionError, match="dimension mismatch"):
        general_product(Tensor.identity(2, 2), Tensor.identity(2, 3))


def test_entry_cap_refuses_large_sparse_product(rng):
    A = random_nonneg(rng, 3, 4)
    with pytest.raises(ResourceCapError):
        general_product(A, A, entry_cap=10, dense_cap=10)


def test_example_square_row_sums(example33):
    np.testing.assert_array_equal(product_row_sums(example33, example33).values, [417, 621])
    np.testing.assert_array_equal(power_row_sums(example33, 2), [417, 621])
    A2 = tensor_power(example33, 2)
    assert A2.order == 5
    np.testing.assert_allclose(row_sums(A2).values, [417, 621])


def test_product_row_sum_bound_example(example33):
    np.testing.assert_array_equal(product_row_sum_bound(example33, example33), [567, 729])


def test_product_row_sums_needs_nonneg():
    A = Tensor.from_dense([[1.0, -1.0], [0.0, 1.0]])
    with pytest.raises(PreconditionError, match="nonnegative"):
        product_row_sums(A, A)


def test_product_diagonal_matches_materialized(rng):
    A = Tensor.from_dense(rng.normal(size=(3, 3, 3)))
    B = Tensor.from_dense(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    C = general_product(A, B)
    expected = [C.entry((i,) * C.order) for i in range(3)]
    np.testing.assert_allclose(product_diagonal(A, B), expected, rtol=1e-12)


def test_diagonal_similarity_example(example33):
    S = diagonal_similarity(example33, [7, 9])
    np.testing.assert_allclose(row_sums(S).values, [417 / 49, 621 / 81], rtol=1e-14)


def test_diagonal_similarity_rejects_nonpositive(example33):
    with pytest.raises(PreconditionError, match="d_2"):
        diagonal_similarity(example33, [1.0, 0.0])


def test_mu_k():
    assert mu_k(2, 5) == 5
    assert mu_k(3, 2) == 3
    assert mu_k(4, 3) == 13
    with pytest.raises(ResourceCapError):
        mu_k(3, 64)


def test_tensor_power_order():
    A = Tensor.identity(3, 2)
    assert tensor_power(A, 3).order == 9
    with pytest.raises(PreconditionError):
        tensor_power(A, 0)


def test_apply_vector_and_row_sums_by_enumeration(rng):
    for m, n in [(2, 3), (3, 3), (4, 2)]:
        A = random_nonneg(rng, m, n, sparse=True)
        a = A.array()
        x = rng.uniform(0.5, 2.0, size=n)
        expected = np.zeros(n)
        rows = np.zeros(n)
        for index in itertools.product(range(n), repeat=m):
            expected[index[0]] += a[index] * np.prod(x[list(index[1:])])
            rows[index[0]] += abs(a[index])
        np.testing.assert_allclose(apply_vector(A, x), expected, rtol=1e-13)
        np.testing.assert_allclose(row_sums(A).values, rows, rtol=1e-13)


def test_tensor_power_against_contractions(rng):
    a = rng.normal(size=(2, 2, 2))
    A = Tensor.from_dense(a)
    square = np.einsum("ijk,jab,kcd->iabcd", a, a, a)
    np.testing.assert_allclose(tensor_power(A, 2).array(), square, rtol=1e-12, atol=1e-12)
    cube = np.einsum("ijk,jabcd,kefgh->iabcdefgh", a, square, square)
    np.testing.assert_allclose(tensor_power(A, 3).array(), cube, rtol=1e-12, atol=1e-12)


def test_large_sparse_times_vector_stays_sparse():
    # A has 10^12 entries but only two nonzeros; AB has 10
    A = Tensor.from_coo([[0] * 12, [1] * 12], [1.0, 2.0], 12, 10)
    C = general_product(A, Tensor.from_dense(np.ones(10)))
    assert C.order == 1
    np.testing.assert_allclose(C.array(), [1.0, 2.0] + [0.0] * 8)
