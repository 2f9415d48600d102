"""
Command-line interface for the mean-rank engine.

This module provides a command-line interface for computing mean ranks
and mean dimensions of algebraic systems described by spec files.

Usage:
    mdim mrk --spec system.toml [options]
    mdim natext --spec system.toml [options]
    mdim tower --spec tower.toml [options]
    mdim snf "[[2, 4], [6, 8]]"
    mdim --help

Exit codes:
    0  success
    1  parse error, missing file or wrong kind of spec
    2  invariant violation (not an endomorphism, invalid tower, legs disagree)
    3  budget exhausted or result unresolved (the report is still written)
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path
from typing import TYPE_CHECKING, Any

from mdim_algebraic import __version__
from mdim_algebraic.cellular import CASpec, ca_mean_dimension
from mdim_algebraic.exceptions import (
    InvariantViolationError,
    MdimError,
    ReportWriteError,
    SpecParseError,
)
from mdim_algebraic.linalg import snf
from mdim_algebraic.natext import (
    TowerSpec,
    natural_extension_check,
    system_for,
    tower_mean_rank,
)
from mdim_algebraic.report import ReportDocument, ReportFormat, ReportWriter
from mdim_algebraic.specfile import SpecKind, SpecParser, SystemSpecFile, parse_matrix_literal
from mdim_algebraic.trajectory import MeanRankReport, RankStatus, mean_rank

if TYPE_CHECKING:
    from mdim_algebraic.trajectory import MeanRankParams

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INVARIANT = 2
EXIT_UNRESOLVED = 3

logger = logging.getLogger("mdim_algebraic")


def create_parser() -> argparse.ArgumentParser:
    """Create the argument parser for the CLI."""
    parser = argparse.ArgumentParser(
        prog="mdim",
        description="Exact mean rank and mean dimension of algebraic dynamical systems.",
    )

    parser.add_argument(
        "-V",
        "--version",
        action="version",
        version=f"%(prog)s {__version__}",
    )

    subparsers = parser.add_subparsers(
        dest="command",
        title="commands",
        description="Available commands",
    )

    mrk = subparsers.add_parser(
        "mrk",
        help="Mean rank of a matrix endomorphism or cellular automaton",
        description="Compute the mean rank (mean dimension) of a system spec.",
    )
    _add_engine_arguments(mrk)

    natext = subparsers.add_parser(
        "natext",
        help="Check that the natural extension preserves mean dimension",
        description="Compare the direct, reduced and colimit mean ranks of a system.",
    )
    _add_engine_arguments(natext)

    tower = subparsers.add_parser(
        "tower",
        help="Mean dimension of a tower of systems",
        description="Validate a tower and report the supremum of the level mean ranks.",
    )
    _add_engine_arguments(tower)

    snf_cmd = subparsers.add_parser(
        "snf",
        help="Smith normal form of an integer matrix",
        description="Print U, D, V with U @ A @ V == D.",
    )
    snf_cmd.add_argument(
        "matrix",
        type=str,
        nargs="?",
        default=None,
        help='Matrix literal, e.g. "[[2, 4], [6, 8]]"',
    )
    snf_cmd.add_argument(
        "-f",
        "--file",
        type=Path,
        default=None,
        help="Read the matrix literal from a file",
    )
    _add_output_arguments(snf_cmd, default_format="text")

    return parser


def _add_output_arguments(sub: argparse.ArgumentParser, default_format: str) -> None:
    sub.add_argument(
        "--report",
        choices=[f.value for f in ReportFormat],
        default=default_format,
        help=f"Report format (default: {default_format})",
    )
    sub.add_argument(
        "-o",
        "--out",
        type=Path,
        default=None,
        help="Write the report to this path instead of stdout",
    )
    sub.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log progress to stderr (-vv for debug output)",
    )


def _add_engine_arguments(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "-s",
        "--spec",
        type=Path,
        required=True,
        help="System spec file (TOML)",
    )
    sub.add_argument(
        "-n",
        "--max-n",
        type=int,
        default=None,
        metavar="N",
        help="Trajectory length budget (overrides the spec file)",
    )
    sub.add_argument(
        "-w",
        "--window",
        type=int,
        default=None,
        metavar="W",
        help="Largest generator window (overrides the spec file)",
    )
    sub.add_argument(
        "--verify",
        action="store_true",
        help="Double-check every rank on the exact path",
    )
    sub.add_argument(
        "-j",
        "--workers",
        type=int,
        default=os.cpu_count() or 1,
        metavar="K",
        help="Worker processes (default: available cores)",
    )
    sub.add_argument(
        "--max-seconds",
        type=float,
        default=None,
        metavar="T",
        help="Wall-clock budget per generator set",
    )
    _add_output_arguments(sub, default_format="json")


def configure_logging(verbosity: int) -> None:
    """WARNING by default, INFO with -v, DEBUG with -vv; always on stderr."""
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _load_spec(args: argparse.Namespace) -> tuple[SystemSpecFile | None, int]:
    """Parse the spec file; on failure print the error and return its exit code."""
    try:
        return SpecParser().parse_file(args.spec), EXIT_OK
    except (FileNotFoundError, SpecParseError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return None, EXIT_PARSE
    except InvariantViolationError as e:
        print(f"Error: {e}", file=sys.stderr)
        return None, EXIT_INVARIANT


def _params(spec: SystemSpecFile, args: argparse.Namespace) -> MeanRankParams:
    return spec.schedule.to_params(
        max_n=args.max_n,
        max_window=args.window,
        verify=args.verify or None,
        max_seconds=args.max_seconds,
    )


def _input_echo(spec: SystemSpecFile) -> dict[str, Any]:
    return {"name": spec.name, "kind": spec.kind.value, "spec": spec.raw}


def _emit(document: ReportDocument, args: argparse.Namespace) -> bool:
    """Write the report to ``--out`` or stdout; False if writing failed."""
    writer = ReportWriter(args.report)
    if args.out is None:
        sys.stdout.write(writer.write_string(document))
        return True
    try:
        writer.write_file(document, args.out)
    except ReportWriteError as e:
        print(f"Error: {e}", file=sys.stderr)
        return False
    logger.info("report written to %s", args.out)
    return True


def _timing(start: float, workers: int, reports: list[MeanRankReport]) -> dict[str, Any]:
    return {
        "elapsed_seconds": round(time.perf_counter() - start, 6),
        "workers": workers,
        "trajectory_steps": sum(r.trajectory_steps for r in reports),
    }


def _mean_rank_exit(report: MeanRankReport) -> int:
    if report.budget_exhausted or not report.resolved:
        return EXIT_UNRESOLVED
    return EXIT_OK


def cmd_mrk(args: argparse.Namespace) -> int:
    """Execute the mrk command."""
    spec, code = _load_spec(args)
    if spec is None:
        return code
    if spec.kind is SpecKind.TOWER:
        print("Error: mrk expects a single system; use 'tower' for towers", file=sys.stderr)
        return EXIT_PARSE

    start = time.perf_counter()
    try:
        params = _params(spec, args)
        system = spec.system
        if isinstance(system, CASpec):
            report = ca_mean_dimension(system, params, workers=args.workers)
        else:
            assert not isinstance(system, TowerSpec)
            carrier, phi = system_for(system)
            report = mean_rank(carrier, phi, params, workers=args.workers, label="mean rank")
    except InvariantViolationError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except (MdimError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_PARSE

    document = ReportDocument(
        command="mrk",
        input=_input_echo(spec),
        result=report,
        timing=_timing(start, args.workers, [report]),
    )
    if not _emit(document, args):
        return EXIT_PARSE
    return _mean_rank_exit(report)


def cmd_natext(args: argparse.Namespace) -> int:
    """Execute the natext command."""
    spec, code = _load_spec(args)
    if spec is None:
        return code
    if spec.kind is SpecKind.TOWER:
        print("Error: natext expects a single system, not a tower", file=sys.stderr)
        return EXIT_PARSE

    start = time.perf_counter()
    try:
        assert not isinstance(spec.system, TowerSpec)
        result = natural_extension_check(spec.system, _params(spec, args), workers=args.workers)
    except InvariantViolationError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except (MdimError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_PARSE

    reports = [r for _, r in result.legs]
    document = ReportDocument(
        command="natext",
        input=_input_echo(spec),
        result=result,
        timing=_timing(start, args.workers, reports),
    )
    if not _emit(document, args):
        return EXIT_PARSE
    if result.verdict == "disagree":
        print("Error: natural extension legs disagree", file=sys.stderr)
        return EXIT_INVARIANT
    if result.verdict == "unresolved":
        return EXIT_UNRESOLVED
    return EXIT_OK


def cmd_tower(args: argparse.Namespace) -> int:
    """Execute the tower command."""
    spec, code = _load_spec(args)
    if spec is None:
        return code
    if not isinstance(spec.system, TowerSpec):
        print("Error: tower expects a spec of kind 'tower'", file=sys.stderr)
        return EXIT_PARSE

    start = time.perf_counter()
    try:
        result = tower_mean_rank(spec.system, _params(spec, args), workers=args.workers)
    except InvariantViolationError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except (MdimError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_PARSE

    document = ReportDocument(
        command="tower",
        input=_input_echo(spec),
        result=result,
        timing=_timing(start, args.workers, list(result.levels)),
    )
    if not _emit(document, args):
        return EXIT_PARSE
    if result.status is RankStatus.BOUND_ONLY:
        return EXIT_UNRESOLVED
    return EXIT_OK


def cmd_snf(args: argparse.Namespace) -> int:
    """Execute the snf command."""
    if args.file is not None:
        if not args.file.exists():
            print(f"Error: Input file not found: {args.file}", file=sys.stderr)
            return EXIT_PARSE
        text = args.file.read_text(encoding="utf-8")
        source = str(args.file)
    elif args.matrix is not None:
        text = args.matrix
        source = "literal"
    else:
        print("Error: Provide a matrix literal or --file", file=sys.stderr)
        return EXIT_PARSE

    try:
        matrix = parse_matrix_literal(text)
    except SpecParseError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_PARSE

    decomposition = snf(matrix)
    document = ReportDocument(
        command="snf",
        input={"name": source, "matrix": matrix.to_rows()},
        result=decomposition,
    )
    if not _emit(document, args):
        return EXIT_PARSE
    return EXIT_OK


def main(args: list[str] | None = None) -> int:
    """Main entry point for the CLI.

    Args:
        args: Command-line arguments (uses sys.argv if None).

    Returns:
        Exit code (see the module docstring).
    """
    parser = create_parser()
    parsed_args = parser.parse_args(args)

    if parsed_args.command is None:
        parser.print_help()
        return EXIT_OK

    configure_logging(parsed_args.verbose)

    if parsed_args.command == "mrk":
        return cmd_mrk(parsed_args)
    elif parsed_args.command == "natext":
        return cmd_natext(parsed_args)
    elif parsed_args.command == "tower":
        return cmd_tower(parsed_args)
    elif parsed_args.command == "snf":
        return cmd_snf(parsed_args)
    else:
        parser.print_help()
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
