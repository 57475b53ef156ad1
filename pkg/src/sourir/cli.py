"""
Command line front end.

Every subcommand is a thin adapter over the library: it parses files, calls the matching library function and
writes the library's rendering. Results go to standard output, diagnostics and logs to standard error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING, NoReturn

from sourir.analysis.checker import check_program, render_diagnostics
from sourir.equivalence.diff import check_transparency, diff_programs, sweep_transparency, version_pair
from sourir.equivalence.plans import EnumeratedPlan, exhaustive_diff
from sourir.equivalence.report import render_diff, render_exhaustive, render_sweep
from sourir.errors import InvalidConfigError, ParseError, PipelineAbortedError, SourirError, UsageError
from sourir.fuzz.campaign import DEFAULT_SCRIPTS, default_output, run_campaign
from sourir.fuzz.config import GenConfig
from sourir.interp.runner import DEFAULT_FUEL, OutcomeKind, run
from sourir.interp.trace import render_trace
from sourir.passes.pipeline import parse_pipeline, run_pipeline
from sourir.text.parser import parse_inputs
from sourir.text.printer import render_program
from sourir.text.source import SourceFile, read_inputs

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from sourir.ir.expressions import Literal
    from sourir.ir.program import Program

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_RUNTIME_ERROR = 2
EXIT_FUEL_EXHAUSTED = 3
EXIT_USAGE = 64
EXIT_BAD_INPUT = 65

_RUN_EXIT_CODES = {
    OutcomeKind.STOPPED: EXIT_OK,
    OutcomeKind.RUNTIME_ERROR: EXIT_RUNTIME_ERROR,
    OutcomeKind.FUEL_EXHAUSTED: EXIT_FUEL_EXHAUSTED,
}


class _Parser(argparse.ArgumentParser):
    """Argument parser raising `UsageError` instead of exiting with status 2."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(message)


def _load(path: str) -> Program:
    return SourceFile.read(path).program


def _inputs(value: str | None) -> list[Literal]:
    if value is None:
        return []
    if value.startswith("@"):
        return read_inputs(value[1:])
    return parse_inputs(value)


def _pipeline_text(value: str) -> str:
    """`@file`, an existing file, or inline stages separated by `;`."""
    path = Path(value.removeprefix("@"))
    if value.startswith("@") or path.is_file():
        return path.read_text(encoding="utf-8")
    return value.replace(";", "\n")


def _positive(value: str) -> int:
    try:
        number = int(value)
    except ValueError as e:
        msg = f"expected an integer, got {value!r}"
        raise argparse.ArgumentTypeError(msg) from e
    if number < 1:
        msg = f"expected a positive integer, got {number}"
        raise argparse.ArgumentTypeError(msg)
    return number


def _plan(tokens: Sequence[str]) -> EnumeratedPlan:
    settings: dict[str, str] = {}
    for token in tokens:
        key, sep, value = token.partition("=")
        if not sep or key not in {"pool", "reads"}:
            msg = f"--enumerate expects pool=<literals> reads=<n>, got {token!r}"
            raise UsageError(msg)
        settings[key] = value
    if set(settings) != {"pool", "reads"}:
        msg = "--enumerate needs both pool=<literals> and reads=<n>"
        raise UsageError(msg)
    try:
        reads = int(settings["reads"])
        return EnumeratedPlan(tuple(parse_inputs(settings["pool"])), reads)
    except ValueError as e:
        msg = f"invalid --enumerate: {e}"
        raise UsageError(msg) from e


def _write(text: str) -> None:
    sys.stdout.write(text)
    sys.stdout.flush()


# Subcommands


def _check(args: argparse.Namespace) -> int:
    diagnostics = check_program(_load(args.file))
    if diagnostics:
        sys.stderr.write(render_diagnostics(diagnostics, args.file))
        return EXIT_FAILED
    return EXIT_OK


def _run(args: argparse.Namespace) -> int:
    result = run(_load(args.file), _inputs(args.inputs), args.fuel)
    _write(result.render() if args.trace else render_trace(result.trace))
    if result.message is not None:
        sys.stderr.write(f"{result.outcome.render()}: {result.message}\n")
    return _RUN_EXIT_CODES[result.outcome.kind]


def _opt(args: argparse.Namespace) -> int:
    program = _load(args.file)
    try:
        optimized, reports = run_pipeline(program, parse_pipeline(_pipeline_text(args.pipeline)))
    except PipelineAbortedError as e:
        sys.stderr.write(f"{e}\n")
        return EXIT_FAILED
    rendered = "".join(f"{report.render()}\n" for report in reports)
    if args.output is None:
        _write(render_program(optimized))
        sys.stderr.write(rendered)
    else:
        SourceFile(optimized).to_file(args.output)
        _write(rendered)
    return EXIT_OK


def _diff(args: argparse.Namespace) -> int:
    if args.fn is not None:
        if len(args.files) != 1 or args.v1 is None or args.v2 is None:
            msg = "--fn needs --v1, --v2 and exactly one file"
            raise UsageError(msg)
        left, right = version_pair(_load(args.files[0]), args.fn, args.v1, args.v2)
    else:
        if len(args.files) != 2:  # noqa: PLR2004
            msg = "diff needs two files, or one file with --fn, --v1 and --v2"
            raise UsageError(msg)
        left, right = _load(args.files[0]), _load(args.files[1])
    if args.enumerate is not None:
        if args.inputs is not None:
            msg = "--inputs and --enumerate are exclusive"
            raise UsageError(msg)
        results = exhaustive_diff(left, right, _plan(args.enumerate), args.fuel, collect_all=True)
        _write(render_exhaustive(results))
        return EXIT_OK if all(result.passed for _, result in results) else EXIT_FAILED
    result = diff_programs(left, right, _inputs(args.inputs), args.fuel)
    _write(render_diff(result))
    return EXIT_OK if result.passed else EXIT_FAILED


def _transparency(args: argparse.Namespace) -> int:
    program, inputs = _load(args.file), _inputs(args.inputs)
    if args.sweep:
        results = sweep_transparency(program, inputs, args.fuel)
        _write(render_sweep(results))
        return EXIT_OK if all(result.passed for _, result in results) else EXIT_FAILED
    result = check_transparency(program, inputs, args.fuel)
    _write(render_diff(result))
    return EXIT_OK if result.passed else EXIT_FAILED


def _fuzz(args: argparse.Namespace) -> int:
    cfg = GenConfig.from_toml(args.cfg) if args.cfg is not None else GenConfig()
    output = Path(args.out) if args.out is not None else default_output()
    summary = run_campaign(
        cfg.with_seed(args.seed),
        args.count,
        fuel=args.fuel,
        scripts=DEFAULT_SCRIPTS,
        workers=args.workers,
        output=output,
        stop_on_failure=True,
        progress=args.verbose > 0,
    )
    _write(summary.render())
    if summary.failures:
        sys.stderr.write(f"Reproducers written to {output}\n")
        return EXIT_FAILED
    return EXIT_OK


def _parser() -> _Parser:
    parser = _Parser(prog="sourir", description="Speculative optimization workbench for the sourir IR.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="Log INFO with -v, DEBUG with -vv.")
    commands = parser.add_subparsers(dest="command", required=True)

    def command(name: str, handler: Callable[[argparse.Namespace], int], description: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=description, description=description)
        sub.set_defaults(handler=handler)
        return sub

    def fuel(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--fuel", type=_positive, default=DEFAULT_FUEL, help="Step bound per run.")

    def inputs(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--inputs", help="Input script: @file or an inline comma separated list of literals.")

    sub = command("check", _check, "Check well-formedness; diagnostics go to standard error.")
    sub.add_argument("file")

    sub = command("run", _run, "Run a program and print its trace.")
    sub.add_argument("file")
    inputs(sub)
    fuel(sub)
    sub.add_argument("--trace", action="store_true", help="Append the outcome and step count line.")

    sub = command("opt", _opt, "Apply a pass pipeline and write the transformed program.")
    sub.add_argument("file")
    sub.add_argument("--pipeline", required=True, help="Pipeline file, @file, or inline stages separated by ';'.")
    sub.add_argument("-o", "--output", help="Output file; default writes the program to standard output.")

    sub = command("diff", _diff, "Compare the traces of two programs or of two versions of a function.")
    sub.add_argument("files", nargs="+", metavar="file")
    sub.add_argument("--fn", help="Function whose versions are compared.")
    sub.add_argument("--v1", help="Version active in the left run.")
    sub.add_argument("--v2", help="Version active in the right run.")
    inputs(sub)
    sub.add_argument("--enumerate", nargs=2, metavar=("pool=..", "reads=.."), help="Compare on every script.")
    fuel(sub)

    sub = command("transparency", _transparency, "Compare plain runs with runs that deoptimize at assumes.")
    sub.add_argument("file")
    sub.add_argument("--sweep", action="store_true", help="Force one assume site at a time.")
    inputs(sub)
    fuel(sub)

    sub = command("fuzz", _fuzz, "Run the end-to-end fuzz campaign.")
    sub.add_argument("--seed", type=int, required=True)
    sub.add_argument("--count", type=_positive, required=True)
    sub.add_argument("--cfg", help="Generator configuration TOML file.")
    sub.add_argument("--workers", type=_positive, default=1, help="Worker processes.")
    sub.add_argument("--out", help="Reproducer directory; default is a fresh name in the working directory.")
    fuel(sub)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run the command line.

    Args:
        argv (Sequence[str] | None): Arguments without the program name. Default reads `sys.argv`.

    Returns:
        int: Exit code.
    """
    try:
        args = _parser().parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"sourir: {e}\n")
        return EXIT_USAGE
    _configure_logging(args.verbose)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except UsageError as e:
        sys.stderr.write(f"sourir: {e}\n")
        return EXIT_USAGE
    except (OSError, ParseError, InvalidConfigError) as e:
        logger.debug("Bad input", exc_info=True)
        sys.stderr.write(f"sourir: {e}\n")
        return EXIT_BAD_INPUT
    except SourirError as e:
        sys.stderr.write(f"sourir: {e}\n")
        return EXIT_FAILED
