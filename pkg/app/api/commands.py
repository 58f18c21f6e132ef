"""
Subcommand handlers. Each takes the parsed argparse namespace and returns a
CommandResult whose RunReport the front end prints as JSON.
"""
import argparse
import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from app.api.schemas import (
    BoundIntervalOut,
    CheckOut,
    CircuitRegionOut,
    CWCertificateOut,
    DiskOut,
    EigenEstimateOut,
    ReferenceCheckOut,
    ProductOut,
    RegionsOut,
    RowSumOut,
    RunReport,
    TensorInfoOut,
    encode_complex,
)
from app.core.errors import PreconditionError
from app.models.tensor import RowSumProfile, Tensor, row_sums
from app.services import bounds, inclusion, oracle, product
from app.services.reference_check import ReferenceCheckEngine
from app.services.storage import dump_tensor, load_tensor, tensor_to_document
from app.services.svg_report import render_regions

logger = logging.getLogger(__name__)


@dataclass
class CommandResult:
    report: RunReport
    exit_code: int = 0
    text: str | None = None   # printed instead of the report JSON when set


class _WarningCollector(logging.Handler):
    def __init__(self):
        super().__init__(level=logging.WARNING)
        self.messages: list[str] = []

    def emit(self, record: logging.LogRecord) -> None:
        self.messages.append(record.getMessage())


@contextmanager
def collect_warnings():
    handler = _WarningCollector()
    root = logging.getLogger("app")
    saved = root.level
    if root.getEffectiveLevel() > logging.WARNING:
        root.setLevel(logging.WARNING)
    root.addHandler(handler)
    try:
        yield handler.messages
    finally:
        root.removeHandler(handler)
        root.setLevel(saved)


class _Run:
    """Per-command bookkeeping: input digests, warnings, timing."""

    def __init__(self, command: str):
        self.command = command
        self.inputs: dict[str, str] = {}
        self.started = time.perf_counter()

    def load(self, path: str) -> Tensor:
        T, digest = load_tensor(path)
        self.inputs[path] = digest
        return T

    def report(self, outputs: dict, warnings: list[str]) -> RunReport:
        return RunReport(
            command=self.command,
            inputs=self.inputs,
            outputs=outputs,
            timing_ms=(time.perf_counter() - self.started) * 1000.0,
            warnings=list(warnings),
        )


# ── encoders ─────────────────────────────────────────────────────────────────

def interval_out(b: bounds.BoundInterval) -> BoundIntervalOut:
    return BoundIntervalOut(
        lower=b.lower,
        upper=b.upper,
        method=b.method,
        witnesses=(b.witness_index_low, b.witness_index_high),
        exact_fractions=b.exact_strings(),
    )


def rowsum_out(r: RowSumProfile | np.ndarray) -> RowSumOut:
    if not isinstance(r, RowSumProfile):
        r = RowSumProfile.from_values(r)
    return RowSumOut(values=r.values.tolist(), min=r.min, max=r.max)


def estimate_out(e: oracle.EigenEstimate) -> EigenEstimateOut:
    return EigenEstimateOut(
        rho=e.rho,
        vector=np.asarray(e.vector, dtype=float).tolist(),
        residual=e.residual,
        cw_interval=e.cw_interval,
        iterations=e.iterations,
        converged=e.converged,
    )


# ── handlers ─────────────────────────────────────────────────────────────────

def cmd_info(args: argparse.Namespace) -> CommandResult:
    run = _Run("info")
    with collect_warnings() as warnings:
        A = run.load(args.tensor)
        subset = None
        if A.dim <= inclusion.SUBSET_TEST_MAX_N:
            subset = inclusion.weakly_irreducible_paper(A)
        out = TensorInfoOut(
            order=A.order,
            dim=A.dim,
            storage=A.storage,
            nnz=A.nnz,
            nonneg=A.nonneg,
            complex=A.is_complex,
            row_sums=rowsum_out(row_sums(A)),
            weakly_irreducible=inclusion.weakly_irreducible_standard(A),
            weakly_irreducible_subset=subset,
            weakly_connected=inclusion.is_weakly_connected(inclusion.build_digraph(A)),
        )
    return CommandResult(run.report(out.model_dump(mode="json"), warnings))


def cmd_rowsum(args: argparse.Namespace) -> CommandResult:
    run = _Run("rowsum")
    with collect_warnings() as warnings:
        A = run.load(args.tensor)
        out = rowsum_out(row_sums(A))
    return CommandResult(run.report(out.model_dump(mode="json"), warnings))


def cmd_product(args: argparse.Namespace) -> CommandResult:
    run = _Run("product")
    with collect_warnings() as warnings:
        A = run.load(args.A)
        if (args.B is None) == (args.power is None):
            raise PreconditionError("give either a second tensor or --power K")
        if args.power is not None:
            order = (A.order - 1) ** args.power + 1
            if args.row_sums_only:
                out = ProductOut(order=order, dim=A.dim, row_sums=rowsum_out(product.power_row_sums(A, args.power)))
                return CommandResult(run.report(out.model_dump(mode="json"), warnings))
            C = product.tensor_power(A, args.power)
        else:
            B = run.load(args.B)
            shape = product.ProductShape.of(A, B)
            if args.row_sums_only:
                out = ProductOut(
                    order=shape.result_order, dim=A.dim, row_sums=rowsum_out(product.product_row_sums(A, B))
                )
                return CommandResult(run.report(out.model_dump(mode="json"), warnings))
            C = product.general_product(A, B)

        out = ProductOut(order=C.order, dim=C.dim, nnz=C.nnz, row_sums=rowsum_out(row_sums(C)))
        if args.out:
            dump_tensor(C, args.out, format=args.format)
            out.written_to = args.out
        else:
            out.tensor = tensor_to_document(C, format=args.format)
    return CommandResult(run.report(out.model_dump(mode="json"), warnings))


def cmd_bounds(args: argparse.Namespace) -> CommandResult:
    run = _Run(f"bounds {args.kind}")
    with collect_warnings() as warnings:
        A = run.load(args.A)
        if args.kind == "rowsum":
            b = bounds.rowsum_bounds(A)
        elif args.kind == "minc":
            if args.self or args.B is None:
                b = bounds.minc_self(A)
            else:
                b = bounds.minc_bounds(A, run.load(args.B))
        elif args.kind == "minc-power":
            b = bounds.minc_power(A, args.k)
        elif args.kind == "product":
            if args.B is None:
                raise PreconditionError("bounds product needs a second tensor")
            b = bounds.product_rho_bounds(A, run.load(args.B))
        else:
            b = bounds.power_rho_bounds(A, args.k)
    return CommandResult(run.report(interval_out(b).model_dump(mode="json"), warnings))


def _overlay_eigenvalues(A: Tensor, B: Tensor) -> np.ndarray | None:
    shape = product.ProductShape.of(A, B)
    if shape.result_order == 2 and A.dim <= oracle.MATRIX_MAX_DIM:
        return oracle.matrix_spectrum(product.general_product(A, B)).eigenvalues
    if shape.result_order == 3 and A.dim == 2:
        return oracle.small_tensor_spectrum(product.general_product(A, B)).eigenvalues
    logger.warning(
        "no eigenvalue oracle for order %d, dim %d; overlay skipped", shape.result_order, A.dim
    )
    return None


def cmd_regions(args: argparse.Namespace) -> CommandResult:
    run = _Run(f"regions {args.kind}")
    with collect_warnings() as warnings:
        A = run.load(args.A)
        B = run.load(args.B) if args.B else Tensor.identity(2, A.dim)
        disks = inclusion.gershgorin_regions(A, B)
        circuit_regions: list[inclusion.CircuitRegion] = []
        out = RegionsOut(
            type=args.kind,
            disks=[DiskOut(center=encode_complex(d.center), radius=d.radius, row=d.row + 1) for d in disks],
        )
        if args.kind == "brualdi":
            G = inclusion.build_product_digraph(A, B)
            circuit_regions = inclusion.brualdi_regions(A, B, args.circuit_cap, disks=disks, digraph=G)
            out.digraph_exact = G.exact
            out.circuit_regions = [
                CircuitRegionOut(
                    circuit=[v + 1 for v in r.circuit.vertices],
                    centers=[encode_complex(c) for c in r.centers],
                    radii=list(r.radii),
                )
                for r in circuit_regions
            ]

        eigs = _overlay_eigenvalues(A, B) if args.overlay_eigs else None
        if eigs is not None:
            target = circuit_regions if args.kind == "brualdi" else disks
            out.eigenvalues = [encode_complex(z) for z in eigs]
            out.eigenvalues_inside = bool(np.all(inclusion.region_contains(target, eigs)))
            if not out.eigenvalues_inside:
                logger.warning("some oracle eigenvalues lie outside the %s set", args.kind)

        if args.svg:
            svg = render_regions(disks, circuit_regions, eigs if eigs is not None else (), grid=args.grid)
            Path(args.svg).write_text(svg)
            out.svg = args.svg
    return CommandResult(run.report(out.model_dump(mode="json"), warnings))


def cmd_rho(args: argparse.Namespace) -> CommandResult:
    run = _Run("rho")
    with collect_warnings() as warnings:
        A = run.load(args.tensor)
        est = oracle.power_rho(A, args.tol, args.max_iter)
        if not est.converged:
            logger.warning("power iteration did not converge in %d iterations", est.iterations)
    return CommandResult(run.report(estimate_out(est).model_dump(mode="json"), warnings))


def cmd_cw_cert(args: argparse.Namespace) -> CommandResult:
    run = _Run("cw-cert")
    with collect_warnings() as warnings:
        A = run.load(args.tensor)
        cert = bounds.cw_certificate(A, args.k, args.tol, max_iter=args.max_iter)
        out = CWCertificateOut(
            k=args.k,
            gap=cert.gap,
            interval=interval_out(cert.interval),
            estimate=estimate_out(cert.estimate),
            B=tensor_to_document(cert.B, format="coo"),
        )
    return CommandResult(run.report(out.model_dump(mode="json"), warnings))


def cmd_verify_reference(args: argparse.Namespace) -> CommandResult:
    run = _Run("verify-paper")
    with collect_warnings() as warnings:
        result = ReferenceCheckEngine().run()
    out = ReferenceCheckOut(
        passed=result.passed,
        checks=[CheckOut(name=c.name, passed=c.passed, detail=c.detail) for c in result.checks],
        first_failure=result.first_failure,
    )
    report = run.report(out.model_dump(mode="json"), warnings)
    code = 0 if result.passed else 1
    if args.json:
        return CommandResult(report, code)
    lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}" for c in result.checks]
    if result.first_failure:
        lines.append(f"first failed identity: {result.first_failure}")
    else:
        lines.append(f"all {len(result.checks)} checks passed")
    return CommandResult(report, code, "\n".join(lines))


HANDLERS = {
    "info": cmd_info,
    "rowsum": cmd_rowsum,
    "product": cmd_product,
    "bounds": cmd_bounds,
    "regions": cmd_regions,
    "rho": cmd_rho,
    "cw-cert": cmd_cw_cert,
    "verify-paper": cmd_verify_reference,
}
