from __future__ import annotations

import dataclasses
import enum
import logging
from typing import TYPE_CHECKING, Final, Protocol

from sourir.errors import ExecutionError, RuntimeErrorKind
from sourir.interp.machine import NEVER, Configuration, ForcePolicy, InputCursor, step
from sourir.interp.trace import StopAction, render_trace

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from sourir.interp.trace import Action, Trace
    from sourir.ir.expressions import Literal
    from sourir.ir.program import Location, Program

logger = logging.getLogger(__name__)

DEFAULT_FUEL: Final[int] = 100_000


class ExecutionObserver(Protocol):
    """
    Hooks called by an instrumented run.

    Observers must not modify the configuration they are shown.
    """

    def before_step(self, config: Configuration) -> None:
        """
        Inspect the configuration before each step.

        Args:
            config (Configuration): Current configuration.
        """
        ...

    def after_deopt(self, site: Location, config: Configuration) -> None:
        """
        Inspect the configuration right after a deoptimization.

        Args:
            site (Location): Location of the assume that deoptimized.
            config (Configuration): Configuration at the deoptimization target.
        """
        ...


class OutcomeKind(enum.StrEnum):
    """How a run ended."""

    STOPPED = "stopped"
    FUEL_EXHAUSTED = "fuel"
    RUNTIME_ERROR = "error"


@dataclasses.dataclass(frozen=True, slots=True)
class Outcome:
    """End state of a run. Runtime errors carry their kind and the location of the failing instruction."""

    kind: OutcomeKind
    error: RuntimeErrorKind | None = None
    location: str | None = None

    def __post_init__(self) -> None:
        if (self.kind is OutcomeKind.RUNTIME_ERROR) != (self.error is not None):
            msg = f"Outcome {self.kind} {'requires' if self.error is None else 'does not take'} an error kind."
            raise ValueError(msg)

    @classmethod
    def stopped(cls) -> Outcome:
        """
        Normal termination.

        Returns:
            Outcome: Stopped outcome.
        """
        return cls(OutcomeKind.STOPPED)

    @classmethod
    def fuel_exhausted(cls) -> Outcome:
        """
        Step budget used up.

        Returns:
            Outcome: Fuel outcome.
        """
        return cls(OutcomeKind.FUEL_EXHAUSTED)

    @classmethod
    def runtime_error(cls, error: RuntimeErrorKind, location: str | None) -> Outcome:
        """
        Stuck configuration.

        Args:
            error (RuntimeErrorKind): Reason.
            location (str | None): Location of the failing instruction.

        Returns:
            Outcome: Error outcome.
        """
        return cls(OutcomeKind.RUNTIME_ERROR, error, location)

    def same_class(self, other: Outcome) -> bool:
        """
        Compare outcomes ignoring error locations, which legitimately differ between versions.

        Args:
            other (Outcome): Outcome to compare with.

        Returns:
            bool: True if both have the same kind and error kind.
        """
        return (self.kind, self.error) == (other.kind, other.error)

    def render(self) -> str:
        """
        Render as `stopped`, `fuel` or `error:<kind>@F.V.L`.

        Returns:
            str: Outcome text.
        """
        if self.kind is OutcomeKind.RUNTIME_ERROR:
            return f"error:{self.error}@{self.location or '?'}"
        return self.kind.value

    def __str__(self) -> str:
        return self.render()


@dataclasses.dataclass(frozen=True, slots=True)
class RunResult:
    """Outcome, trace and number of executed steps of a run."""

    outcome: Outcome
    trace: Trace
    steps: int
    message: str | None = dataclasses.field(default=None, compare=False)
    """Human readable detail of a runtime error."""

    @property
    def stopped(self) -> bool:
        """
        Whether the run terminated normally.

        Returns:
            bool: True for the stopped outcome.
        """
        return self.outcome.kind is OutcomeKind.STOPPED

    def footer(self) -> str:
        """
        Summary line `-- outcome: <outcome> steps:<n>`.

        Returns:
            str: Footer line without newline.
        """
        return f"-- outcome: {self.outcome.render()} steps:{self.steps}"

    def render(self) -> str:
        """
        Render the trace followed by the footer line.

        Returns:
            str: Trace text.
        """
        return f"{render_trace(self.trace)}{self.footer()}\n"


def run_forcing_deopt(
    program: Program,
    inputs: Sequence[Literal] = (),
    fuel: int = DEFAULT_FUEL,
    policy: ForcePolicy = NEVER,
    *,
    observers: Iterable[ExecutionObserver] = (),
) -> RunResult:
    """
    Run a program, deoptimizing at the assume occurrences the policy selects.

    Forced assumes still evaluate their predicates, so evaluation errors are reported as usual.

    Args:
        program (Program): Program to run.
        inputs (Sequence[Literal]): Input script for `read`.
        fuel (int): Maximum number of steps. Default is `DEFAULT_FUEL`.
        policy (ForcePolicy): Occurrences to force. Default forces nothing.
        observers (Iterable[ExecutionObserver]): Instrumentation hooks.

    Returns:
        RunResult: Outcome, trace and step count. Runtime errors are reported here and never raised.
    """
    observers = tuple(observers)
    trace: list[Action] = []
    steps = 0
    try:
        config = Configuration.start(program)
    except ExecutionError as e:
        return RunResult(Outcome.runtime_error(e.kind, None), (), 0, e.message)
    cursor = InputCursor(inputs)
    while not config.terminated:
        if steps >= fuel:
            logger.debug("Fuel of %d steps exhausted at %s", fuel, config.location)
            return RunResult(Outcome.fuel_exhausted(), tuple(trace), steps)
        for observer in observers:
            observer.before_step(config)
        site, deopts = config.location, config.deopts
        try:
            action = step(config, cursor, policy=policy)
        except ExecutionError as e:
            return RunResult(Outcome.runtime_error(e.kind, e.location), tuple(trace), steps + 1, e.message)
        steps += 1
        if action is not None:
            trace.append(action)
        if config.deopts != deopts and site is not None:
            for observer in observers:
                observer.after_deopt(site, config)
    if not trace or not isinstance(trace[-1], StopAction):
        msg = "A terminated run must end with a stop action."
        raise RuntimeError(msg)
    return RunResult(Outcome.stopped(), tuple(trace), steps)


def run(
    program: Program,
    inputs: Sequence[Literal] = (),
    fuel: int = DEFAULT_FUEL,
    *,
    observers: Iterable[ExecutionObserver] = (),
) -> RunResult:
    """
    Run a program from its start configuration.

    Args:
        program (Program): Program to run.
        inputs (Sequence[Literal]): Input script for `read`.
        fuel (int): Maximum number of steps. Default is `DEFAULT_FUEL`.
        observers (Iterable[ExecutionObserver]): Instrumentation hooks.

    Returns:
        RunResult: Outcome, trace and step count.
    """
    return run_forcing_deopt(program, inputs, fuel, NEVER, observers=observers)
