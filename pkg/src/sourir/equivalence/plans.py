"""Input plans: finite families of input scripts a pair of programs is compared on."""

from __future__ import annotations

import abc
import dataclasses
import itertools
import logging
from typing import TYPE_CHECKING, Protocol

from sourir.equivalence.diff import diff_programs
from sourir.interp.runner import DEFAULT_FUEL

if TYPE_CHECKING:
    from collections.abc import Iterator

    from sourir.equivalence.diff import DiffResult
    from sourir.ir.expressions import Literal
    from sourir.ir.program import Program

logger = logging.getLogger(__name__)


class IInputPlan(Protocol):
    def scripts(self) -> Iterator[tuple[Literal, ...]]:
        """
        Enumerate the input scripts of the plan.

        Yields:
            tuple[Literal, ...]: One input script.
        """
        ...


class InputPlanBase(IInputPlan, abc.ABC):
    def __len__(self) -> int:
        return sum(1 for _ in self.scripts())


@dataclasses.dataclass(frozen=True, slots=True)
class ExplicitPlan(InputPlanBase):
    """Plan listing its scripts one by one."""

    listed: tuple[tuple[Literal, ...], ...]

    def scripts(self) -> Iterator[tuple[Literal, ...]]:
        yield from self.listed


@dataclasses.dataclass(frozen=True, slots=True)
class EnumeratedPlan(InputPlanBase):
    """Every script of exactly `reads` literals drawn from `pool`, in lexicographic pool order."""

    pool: tuple[Literal, ...]
    reads: int

    def __post_init__(self) -> None:
        if self.reads < 0:
            msg = f"Read count must not be negative, got {self.reads}."
            raise ValueError(msg)

    def scripts(self) -> Iterator[tuple[Literal, ...]]:
        yield from itertools.product(self.pool, repeat=self.reads)

    def __len__(self) -> int:
        return len(self.pool) ** self.reads


def exhaustive_diff(
    left: Program,
    right: Program,
    plan: IInputPlan,
    fuel: int = DEFAULT_FUEL,
    *,
    collect_all: bool = False,
) -> list[tuple[tuple[Literal, ...], DiffResult]]:
    """
    Compare two programs on every script of a plan.

    Args:
        left (Program): First program.
        right (Program): Second program.
        plan (IInputPlan): Scripts to run.
        fuel (int): Step bound per run. Default is `DEFAULT_FUEL`.
        collect_all (bool): Keep going after the first counterexample. Default is False.

    Returns:
        list[tuple[tuple[Literal, ...], DiffResult]]: One entry per script run, the counterexample last unless
            `collect_all` is set.
    """
    results = []
    for script in plan.scripts():
        result = diff_programs(left, right, script, fuel)
        results.append((script, result))
        if not result.passed:
            logger.info("Counterexample after %d scripts: %s", len(results), result.summary())
            if not collect_all:
                break
    return results
