import json

import numpy as np
import pytest

from app.models.tensor import Tensor
from app.services.reference_check import reference_tensor


@pytest.fixture
def example33() -> Tensor:
    return reference_tensor()


@pytest.fixture
def identity2() -> Tensor:
    return Tensor.identity(2, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture
def write_tensor(tmp_path):
    """Write a tensor document to a temp file and return its path."""
    def _write(doc: dict, name: str = "t.json") -> str:
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)
    return _write


def random_nonneg(rng, m: int, n: int, *, sparse: bool = False, density: float = 0.3) -> Tensor:
    """Random nonnegative tensor; sparse ones keep a positive cycle so every row is reachable."""
    A = rng.uniform(0.0, 1.0, size=(n,) * m)
    if sparse:
        A = A * (rng.uniform(size=A.shape) < density)
        for i in range(n):
            A[(i,) + ((i + 1) % n,) * (m - 1)] = rng.uniform(0.5, 1.0)
        return Tensor.from_dense(A).to_sparse()
    return Tensor.from_dense(A)
