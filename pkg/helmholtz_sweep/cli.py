"""Command line interface: solve, study and slice."""
from __future__ import annotations

import argparse
import logging
from collections.abc import Sequence

from . import __version__
from .config import load_config, parse_vary
from .const import (
    ATTR_KEY,
    ATTR_STATUS,
    EXIT_CONVERGED,
    EXIT_ERROR,
    EXIT_NOT_CONVERGED,
    PLANES,
    STATUS_CONVERGED,
    STATUS_FAILED,
)
from .coordinator import sweep_study
from .exceptions import HelmholtzSweepError
from .field_io import load_field
from .runner import export_slice, run

_LOGGER = logging.getLogger(__name__)


def _solve(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    result = run(config, args.out)
    report = result.report
    print(
        f"{result.row[ATTR_KEY]}: {report.status} after {report.iterations} iterations, "
        f"residual {report.final_residual:.3e}, setup {report.setup_time:.2f}s, "
        f"solve {report.solve_time:.2f}s"
    )
    return EXIT_CONVERGED if report.converged else EXIT_NOT_CONVERGED


def _study(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    rows = sweep_study(config, parse_vary(args.vary), args.out, args.workers)
    statuses = {row.get(ATTR_STATUS) for row in rows}
    for row in rows:
        print(f"{row[ATTR_KEY]}: {row.get(ATTR_STATUS)}")
    if STATUS_FAILED in statuses:
        return EXIT_ERROR
    if statuses - {STATUS_CONVERGED}:
        return EXIT_NOT_CONVERGED
    return EXIT_CONVERGED


def _slice(args: argparse.Namespace) -> int:
    field = load_field(args.input)
    path = export_slice(field, args.plane, args.index, args.out)
    print(f"wrote {path} and {path.with_suffix('.pgm')}")
    return EXIT_CONVERGED


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser."""
    parser = argparse.ArgumentParser(
        prog="helmholtz_sweep",
        description="Recursive sweeping preconditioner for the 3D Helmholtz equation",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="log per-iteration details"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="solve one configured problem")
    solve.add_argument("--config", required=True, help="key = value config file")
    solve.add_argument("--out", default=None, help="output directory")
    solve.set_defaults(handler=_solve)

    study = commands.add_parser("study", help="run a parameter grid")
    study.add_argument("--config", required=True, help="base config file")
    study.add_argument(
        "--vary", required=True, help="parameter grid, e.g. 'omega_over_2pi=2,4;fronts=one,two'"
    )
    study.add_argument("--out", default=None, help="output directory")
    study.add_argument("--workers", type=int, default=None, help="rows run concurrently")
    study.set_defaults(handler=_study)

    cut = commands.add_parser("slice", help="export a plane of a stored field")
    cut.add_argument("--in", dest="input", required=True, help="HSW1 field file")
    cut.add_argument("--plane", choices=PLANES, default="x1")
    cut.add_argument("--index", type=int, required=True, help="0-based plane index")
    cut.add_argument("--out", required=True, help="output HSW1 path")
    cut.set_defaults(handler=_slice)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line interface and return the exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except (HelmholtzSweepError, OSError) as err:
        _LOGGER.error("%s", err)
        return EXIT_ERROR
