import argparse
import json
import logging
import sys

from app import __version__
from app.api.commands import HANDLERS
from app.core.config import get_settings
from app.core.errors import TensorBoundsError

logger = logging.getLogger("app")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tensorbounds",
        description="Spectral-radius bounds and eigenvalue inclusion sets for tensor products",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("info", help="order, dim, storage, row sums, irreducibility")
    p.add_argument("tensor")

    p = sub.add_parser("rowsum", help="row sums r_i(A)")
    p.add_argument("tensor")

    p = sub.add_parser("product", help="general product AB or power A^k")
    p.add_argument("A")
    p.add_argument("B", nargs="?")
    p.add_argument("--power", type=int, help="compute A^K instead of AB")
    p.add_argument("--row-sums-only", action="store_true", help="row sums without materializing")
    p.add_argument("--format", choices=["dense", "coo"], help="storage of the written tensor")
    p.add_argument("--out", help="write the product to this file")

    p = sub.add_parser("bounds", help="spectral-radius bounds")
    p.add_argument("kind", choices=["rowsum", "minc", "minc-power", "product", "power"])
    p.add_argument("A")
    p.add_argument("B", nargs="?")
    p.add_argument("--self", action="store_true", help="minc with B = A")
    p.add_argument("--k", type=int, default=1)

    p = sub.add_parser("regions", help="Gershgorin or Brualdi inclusion set of AB")
    p.add_argument("kind", choices=["gershgorin", "brualdi"])
    p.add_argument("A")
    p.add_argument("B", nargs="?", help="defaults to the identity matrix")
    p.add_argument("--svg", help="write an SVG rendering to this file")
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--overlay-eigs", action="store_true")
    p.add_argument("--circuit-cap", type=int)

    p = sub.add_parser("rho", help="spectral radius by power iteration")
    p.add_argument("tensor")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)

    p = sub.add_parser("cw-cert", help="Collatz-Wielandt certificate of order K")
    p.add_argument("tensor")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)

    p = sub.add_parser("verify-paper", help="check every identity of the reference example")
    p.add_argument("--json", action="store_true")
    return parser


def configure_logging(verbose: int) -> None:
    level = get_settings().LOG_LEVEL
    if verbose == 1:
        level = "INFO"
    elif verbose >= 2:
        level = "DEBUG"
    # the handler keeps its own level: the run report may lower the "app" logger
    stderr = logging.StreamHandler(sys.stderr)
    stderr.setLevel(level)
    logging.basicConfig(
        handlers=[stderr],
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        result = HANDLERS[args.command](args)
    except TensorBoundsError as e:
        logger.debug("%s failed", args.command, exc_info=True)
        print(json.dumps({"error": e.detail, "exit_code": e.exit_code}))
        return e.exit_code
    if result.text is not None:
        print(result.text)
    else:
        print(result.report.model_dump_json(indent=2))
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
