"""
Differential trace comparison.

Two runs agree when their traces are identical and they end the same way; runtime error kinds must match, their
locations need not. A run that exhausted its fuel proves nothing beyond its trace, so a fuel-bound prefix of the
other trace is inconclusive rather than a failure.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
from typing import TYPE_CHECKING

from sourir.equivalence.harness import driver_harness, with_harness
from sourir.interp.machine import ForcePolicy
from sourir.interp.runner import DEFAULT_FUEL, OutcomeKind, run, run_forcing_deopt
from sourir.interp.trace import render_action
from sourir.ir.program import MAIN, Location

if TYPE_CHECKING:
    from collections.abc import Sequence

    from sourir.interp.runner import RunResult
    from sourir.interp.trace import Action
    from sourir.ir.expressions import Literal
    from sourir.ir.program import Program

logger = logging.getLogger(__name__)


class Verdict(enum.StrEnum):
    """Outcome of a differential comparison."""

    EQUAL = "EQUAL"
    DIVERGED = "DIVERGED"
    OUTCOME_MISMATCH = "OUTCOME"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclasses.dataclass(frozen=True, slots=True)
class DiffResult:
    """Verdict of comparing two runs, with both runs attached."""

    verdict: Verdict
    left: RunResult
    right: RunResult
    position: int | None = None
    """Index of the first differing action for `DIVERGED`."""
    left_action: Action | None = None
    right_action: Action | None = None

    @property
    def passed(self) -> bool:
        """
        Whether the comparison found no counterexample.

        Returns:
            bool: True for `EQUAL` and `INCONCLUSIVE`.
        """
        return self.verdict in {Verdict.EQUAL, Verdict.INCONCLUSIVE}

    def summary(self) -> str:
        """
        One-line verdict.

        Returns:
            str: `EQUAL`, `DIVERGED at <n>: left=<a> right=<a>`, `OUTCOME left=<o> right=<o>` or
                `INCONCLUSIVE fuel=<n>`.
        """
        match self.verdict:
            case Verdict.EQUAL:
                return "EQUAL"
            case Verdict.DIVERGED:
                left, right = render_action(self.left_action), render_action(self.right_action)
                return f"DIVERGED at {self.position}: left={left} right={right}"
            case Verdict.OUTCOME_MISMATCH:
                return f"OUTCOME left={self.left.outcome.render()} right={self.right.outcome.render()}"
            case Verdict.INCONCLUSIVE:
                return f"INCONCLUSIVE fuel={max(self.left.steps, self.right.steps)}"


def compare_runs(left: RunResult, right: RunResult) -> DiffResult:
    """
    Compare two finished runs.

    Args:
        left (RunResult): First run.
        right (RunResult): Second run.

    Returns:
        DiffResult: Verdict.
    """
    for position, (a, b) in enumerate(zip(left.trace, right.trace, strict=False)):
        if a != b:
            return DiffResult(Verdict.DIVERGED, left, right, position, a, b)
    left_fuel = left.outcome.kind is OutcomeKind.FUEL_EXHAUSTED
    right_fuel = right.outcome.kind is OutcomeKind.FUEL_EXHAUSTED
    shorter = min(len(left.trace), len(right.trace))
    if len(left.trace) != len(right.trace):
        if (len(left.trace) == shorter and left_fuel) or (len(right.trace) == shorter and right_fuel):
            logger.warning("Inconclusive comparison: a run exhausted its fuel after %d actions", shorter)
            return DiffResult(Verdict.INCONCLUSIVE, left, right)
        left_action = left.trace[shorter] if len(left.trace) > shorter else None
        right_action = right.trace[shorter] if len(right.trace) > shorter else None
        return DiffResult(Verdict.DIVERGED, left, right, shorter, left_action, right_action)
    if left.outcome.same_class(right.outcome):
        if left_fuel:
            logger.warning("Inconclusive comparison: both runs exhausted their fuel")
            return DiffResult(Verdict.INCONCLUSIVE, left, right)
        return DiffResult(Verdict.EQUAL, left, right)
    if left_fuel or right_fuel:
        logger.warning("Inconclusive comparison: one run exhausted its fuel with a matching trace")
        return DiffResult(Verdict.INCONCLUSIVE, left, right)
    return DiffResult(Verdict.OUTCOME_MISMATCH, left, right)


def diff_programs(
    left: Program,
    right: Program,
    inputs: Sequence[Literal] = (),
    fuel: int = DEFAULT_FUEL,
) -> DiffResult:
    """
    Run two programs on the same input script and compare their traces.

    Args:
        left (Program): First program.
        right (Program): Second program.
        inputs (Sequence[Literal]): Input script for both runs.
        fuel (int): Step bound per run. Default is `DEFAULT_FUEL`.

    Returns:
        DiffResult: Verdict.
    """
    return compare_runs(run(left, inputs, fuel), run(right, inputs, fuel))


def version_pair(
    program: Program,
    function: str,
    first: str,
    second: str,
    *,
    harness: Program | None = None,
) -> tuple[Program, Program]:
    """
    Build the two programs compared by `diff_versions`.

    Args:
        program (Program): Program holding the function.
        function (str): Function name.
        first (str): Version active in the left program.
        second (str): Version active in the right program.
        harness (Program | None): Program whose functions replace `main`. Default is `driver_harness` for functions
            other than `main`, and no harness for `main` itself.

    Returns:
        tuple[Program, Program]: Left and right programs; they differ only in the order of the versions of
            `function`.

    Raises:
        UnknownVersionError: If one of the versions does not exist.
    """
    if harness is None and function != MAIN:
        harness = driver_harness(program, function)
    base = program if harness is None else with_harness(program, harness)
    return base.with_active_version(function, first), base.with_active_version(function, second)


def diff_versions(
    program: Program,
    function: str,
    first: str,
    second: str,
    inputs: Sequence[Literal] = (),
    fuel: int = DEFAULT_FUEL,
    *,
    harness: Program | None = None,
) -> DiffResult:
    """
    Compare two versions of a function by making each of them active in turn.

    Args:
        program (Program): Program holding the function.
        function (str): Function name.
        first (str): Version active in the left run.
        second (str): Version active in the right run.
        inputs (Sequence[Literal]): Input script for both runs.
        fuel (int): Step bound per run. Default is `DEFAULT_FUEL`.
        harness (Program | None): Program whose functions replace `main`. Default is `driver_harness` for functions
            other than `main`, and no harness for `main` itself.

    Returns:
        DiffResult: Verdict.

    Raises:
        UnknownVersionError: If one of the versions does not exist.
    """
    left, right = version_pair(program, function, first, second, harness=harness)
    return diff_programs(left, right, inputs, fuel)


def sweep_transparency(
    program: Program,
    inputs: Sequence[Literal] = (),
    fuel: int = DEFAULT_FUEL,
) -> list[tuple[Location, DiffResult]]:
    """
    Check transparency once per static assume site, forcing only that site.

    Args:
        program (Program): Program to check.
        inputs (Sequence[Literal]): Input script.
        fuel (int): Step bound per run. Default is `DEFAULT_FUEL`.

    Returns:
        list[tuple[Location, DiffResult]]: One verdict per assume site, in program order.
    """
    reference = run(program, inputs, fuel)
    results = []
    for site, _ in program.assumes():
        forced = run_forcing_deopt(program, inputs, fuel, ForcePolicy.at_locations(site))
        result = compare_runs(reference, forced)
        logger.debug("Transparency at %s: %s", site, result.summary())
        results.append((site, result))
    return results


def check_transparency(
    program: Program,
    inputs: Sequence[Literal] = (),
    fuel: int = DEFAULT_FUEL,
    policy: ForcePolicy | None = None,
    *,
    sweep: bool = False,
) -> DiffResult:
    """
    Compare a plain run with a run that deoptimizes at forced assumes.

    Args:
        program (Program): Program to check.
        inputs (Sequence[Literal]): Input script.
        fuel (int): Step bound per run. Default is `DEFAULT_FUEL`.
        policy (ForcePolicy | None): Occurrences to force. Default forces every assume.
        sweep (bool): Force one site at a time and report the first failing site, or the last verdict if every site
            passes. Default is False.

    Returns:
        DiffResult: Verdict.
    """
    if sweep:
        results = sweep_transparency(program, inputs, fuel)
        for _, result in results:
            if not result.passed:
                return result
        if results:
            return results[-1][1]
        policy = ForcePolicy.never()
    reference = run(program, inputs, fuel)
    forced = run_forcing_deopt(program, inputs, fuel, policy if policy is not None else ForcePolicy.always())
    return compare_runs(reference, forced)
