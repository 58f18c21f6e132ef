import numpy as np
import pytest

from app.core.errors import ResourceCapError, TensorParseError
from app.models.tensor import Tensor, diagonal, row_sums, validate
from app.services.storage import dump_tensor, load_tensor, tensor_to_document


def test_row_sums_example(example33):
    r = row_sums(example33)
    assert r.values.tolist() == [7.0, 9.0]
    assert (r.min, r.max) == (7.0, 9.0)
    assert (r.argmin, r.argmax) == (0, 1)


def test_row_sums_use_modulus():
    A = Tensor.from_dense([[3 + 4j, -1], [0, 2]])
    assert row_sums(A).values.tolist() == [6.0, 2.0]
    assert A.is_complex and not A.nonneg


@pytest.mark.parametrize("alpha", [2.0, -1.0, 0.5, 1j])
def test_row_sums_scale_with_modulus(rng, alpha):
    A = Tensor.from_dense(rng.normal(size=(3, 3, 3)))
    np.testing.assert_allclose(row_sums(A.scale(alpha)).values, abs(alpha) * row_sums(A).values, rtol=1e-14)


def test_diagonal(example33):
    assert diagonal(example33).entries.tolist() == [3.0, 3.0]


def test_dense_and_sparse_share_coords(example33):
    S = example33.to_sparse()
    assert S.storage == "coo"
    for a, b in zip(example33.coords(), S.coords()):
        np.testing.assert_array_equal(a, b)
    assert S.nnz == 7


def test_identity_and_zeros():
    I = Tensor.identity(3, 2)
    assert I.entry((1, 1, 1)) == 1.0 and I.entry((0, 1, 1)) == 0.0
    assert Tensor.zeros(3, 2).nnz == 0


def test_complex_with_zero_imaginary_is_real():
    A = Tensor.from_dense(np.array([[1 + 0j, 2 + 0j], [0j, 1 + 0j]]))
    assert not A.is_complex and A.nonneg


def test_scale():
    A = Tensor.from_dense([[1.0, 2.0], [3.0, 4.0]])
    assert A.scale(2).array().tolist() == [[2.0, 4.0], [6.0, 8.0]]


def test_validate_coo_one_based():
    doc = {"order": 2, "dim": 2, "format": "coo",
           "entries": [{"idx": [2, 1], "val": 5}, {"idx": [1, 2], "val": [1, -1]}]}
    A = validate(doc)
    assert A.entry((1, 0)) == 5.0
    assert A.entry((0, 1)) == 1 - 1j


def test_validate_rejects_out_of_range_index():
    doc = {"order": 2, "dim": 2, "format": "coo", "entries": [{"idx": [3, 1], "val": 1}]}
    with pytest.raises(TensorParseError, match="out of range"):
        validate(doc)


def test_validate_rejects_duplicate_index():
    doc = {"order": 2, "dim": 2, "format": "coo",
           "entries": [{"idx": [1, 1], "val": 1}, {"idx": [1, 1], "val": 2}]}
    with pytest.raises(TensorParseError, match="duplicate sparse index \\(1, 1\\)"):
        validate(doc)


def test_validate_rejects_zero_dim():
    with pytest.raises(TensorParseError):
        validate({"order": 2, "dim": 0, "format": "dense", "entries": []})


def test_validate_rejects_ragged_dense():
    with pytest.raises(TensorParseError):
        validate({"order": 2, "dim": 2, "format": "dense", "entries": [[1, 2], [3]]})


def test_validate_rejects_unknown_format():
    with pytest.raises(TensorParseError, match="malformed"):
        validate({"order": 2, "dim": 2, "format": "csr", "entries": []})


def test_dense_cap():
    with pytest.raises(ResourceCapError):
        Tensor.from_dense(np.ones((3, 3, 3)), dense_cap=10)


def test_file_round_trip_dense(tmp_path, example33):
    path = tmp_path / "a.json"
    dump_tensor(example33, path)
    B, digest = load_tensor(path)
    assert B.storage == "dense"
    np.testing.assert_array_equal(B.array(), example33.array())
    assert len(digest) == 64


def test_file_round_trip_sparse_complex(tmp_path):
    A = Tensor.from_coo([[0, 1, 1], [1, 0, 0]], [0.1 + 2j, -3.5], 3, 2)
    path = tmp_path / "c.json"
    dump_tensor(A, path, format="coo")
    B, _ = load_tensor(path)
    assert set(B.entries()) == set(A.entries())


def test_document_coo_is_one_based(example33):
    doc = tensor_to_document(example33, format="coo")
    assert doc["entries"][0] == {"idx": [1, 1, 1], "val": 3.0}


def test_load_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(TensorParseError):
        load_tensor(path)
