"""
Reference-example verification.
Runs every bound on the order-3 dimension-2 reference tensor, checks each
identity against its known value and aggregates the checks into a verdict.
"""
from dataclasses import dataclass, field
from fractions import Fraction

from app.models.tensor import Tensor, row_sums
from app.services.bounds import minc_self, rowsum_bounds
from app.services.oracle import power_rho
from app.services.product import power_row_sums

# 1-based entries of the reference tensor
REFERENCE_ENTRIES = {
    (1, 1, 1): 3, (1, 1, 2): 1, (1, 2, 1): 2, (1, 2, 2): 1,
    (2, 1, 1): 0, (2, 1, 2): 4, (2, 2, 1): 2, (2, 2, 2): 3,
}
EXPECTED_ROW_SUMS = (7, 9)
EXPECTED_SQUARE_ROW_SUMS = (417, 621)
EXPECTED_MINC = (Fraction(621, 81), Fraction(417, 49))
FLOAT_TOL = 1e-12


def reference_tensor(overrides: dict[tuple[int, ...], float] | None = None) -> Tensor:
    entries = {**REFERENCE_ENTRIES, **(overrides or {})}
    dense = [[[0.0] * 2 for _ in range(2)] for _ in range(2)]
    for (i, j, k), v in entries.items():
        dense[i - 1][j - 1][k - 1] = v
    return Tensor.from_dense(dense)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    failed_identity: str | None = None


@dataclass
class ReferenceCheckResult:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def first_failure(self) -> str | None:
        for c in self.checks:
            if not c.passed:
                return c.failed_identity or c.name
        return None


def _identities(name: str, got, expected, label: str) -> Check:
    """One check over a vector of identities `label_i = expected_i`."""
    failed = None
    for i, (g, e) in enumerate(zip(got, expected), start=1):
        if abs(float(g) - float(e)) > FLOAT_TOL * max(1.0, abs(float(e))):
            failed = f"{label}_{i} = {e}"
            break
    detail = f"got ({', '.join(repr(float(g)) for g in got)})"
    return Check(name, failed is None, detail, failed)


class ReferenceCheckEngine:

    def run(self, A: Tensor | None = None) -> ReferenceCheckResult:
        A = A if A is not None else reference_tensor()
        result = ReferenceCheckResult()
        checks = result.checks

        r = row_sums(A).values
        checks.append(_identities("row sums r(A) = (7, 9)", r, EXPECTED_ROW_SUMS, "r"))

        r2 = power_row_sums(A, 2)
        checks.append(_identities("row sums r(A^2) = (417, 621)", r2, EXPECTED_SQUARE_ROW_SUMS, "r(A^2)"))

        rs = rowsum_bounds(A)
        checks.append(_identities("row-sum interval [7, 9]", (rs.lower, rs.upper), EXPECTED_ROW_SUMS, "rowsum"))

        mc = minc_self(A)
        exact_ok = mc.exact == EXPECTED_MINC
        floats = _identities("", (mc.lower, mc.upper), EXPECTED_MINC, "minc")
        terms = mc.exact_strings()
        got = ", ".join(terms) if terms else f"{mc.lower!r}, {mc.upper!r}"
        checks.append(Check(
            "minc interval [621/81, 417/49]",
            exact_ok and floats.passed,
            f"got [{got}]",
            None if exact_ok and floats.passed else "minc = [621/81, 417/49]",
        ))

        nested = rs.lower < mc.lower and mc.upper < rs.upper
        checks.append(Check(
            "minc interval strictly inside row-sum interval",
            nested,
            f"[{mc.lower!r}, {mc.upper!r}] in [{rs.lower!r}, {rs.upper!r}]",
        ))

        est = power_rho(A)
        inside = est.converged and mc.contains(est.rho, 1e-9) and rs.contains(est.rho, 1e-9)
        checks.append(Check(
            "power-iteration rho inside both intervals",
            inside,
            f"rho = {est.rho!r} after {est.iterations} iterations (converged={est.converged})",
        ))
        return result
