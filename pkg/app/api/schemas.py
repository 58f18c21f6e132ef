from typing import Any, Literal

from pydantic import BaseModel, Field


# --- Inputs ---
class TensorDocument(BaseModel):
    """Tensor file: nested dense array, or coo list of {"idx": [...], "val": x | [re, im]}."""
    order: int
    dim: int
    format: Literal["dense", "coo"]
    entries: list[Any]


# --- Outputs ---
Complex = tuple[float, float]  # [re, im]


def encode_complex(z: complex) -> Complex:
    z = complex(z)
    return (z.real, z.imag)


class BoundIntervalOut(BaseModel):
    lower: float
    upper: float
    method: str
    witnesses: tuple[int, int]   # 1-based rows attaining lower, upper
    exact_fractions: tuple[str, str] | None = None


class RowSumOut(BaseModel):
    values: list[float]
    min: float
    max: float


class EigenEstimateOut(BaseModel):
    rho: float
    vector: list[float]
    residual: float
    cw_interval: tuple[float, float]
    iterations: int
    converged: bool


class CWCertificateOut(BaseModel):
    k: int
    gap: float
    interval: BoundIntervalOut
    estimate: EigenEstimateOut
    B: dict


class DiskOut(BaseModel):
    center: Complex
    radius: float
    row: int


class CircuitRegionOut(BaseModel):
    circuit: list[int]
    centers: list[Complex]
    radii: list[float]


class RegionsOut(BaseModel):
    type: Literal["gershgorin", "brualdi"]
    disks: list[DiskOut]
    circuit_regions: list[CircuitRegionOut] = []
    eigenvalues: list[Complex] | None = None
    eigenvalues_inside: bool | None = None
    digraph_exact: bool | None = None
    svg: str | None = None


class TensorInfoOut(BaseModel):
    order: int
    dim: int
    storage: Literal["dense", "coo"]
    nnz: int
    nonneg: bool
    complex: bool
    row_sums: RowSumOut
    weakly_irreducible: bool
    weakly_irreducible_subset: bool | None
    weakly_connected: bool


class ProductOut(BaseModel):
    order: int
    dim: int
    nnz: int | None = None
    row_sums: RowSumOut | None = None
    written_to: str | None = None
    tensor: dict | None = None


class CheckOut(BaseModel):
    name: str
    passed: bool
    detail: str


class ReferenceCheckOut(BaseModel):
    passed: bool
    checks: list[CheckOut]
    first_failure: str | None = None


class RunReport(BaseModel):
    command: str
    inputs: dict[str, str] = Field(default_factory=dict)   # path -> sha256
    outputs: dict[str, Any]
    timing_ms: float = Field(ge=0)
    warnings: list[str] = []
