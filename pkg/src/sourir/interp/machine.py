"""
Small-step abstract machine.

A `Configuration` is owned by one run and is updated in place by `step`. Every rule of the operational semantics is a
branch of `step`; deoptimization is factored out into `deoptimize` so the passes' tests can drive it directly.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
from typing import TYPE_CHECKING, Final

from sourir.errors import ExecutionError, FallThroughEndError, RuntimeErrorKind
from sourir.interp.evaluation import as_address, as_bool, as_int, eval_expr, eval_varmap
from sourir.interp.trace import PrintAction, ReadAction, StopAction
from sourir.interp.values import MAX_ARRAY_LENGTH, FunValue, Heap, describe
from sourir.ir.expressions import LITERAL_TYPES, NIL
from sourir.ir.instructions import (
    ArrayAlloc,
    ArrayLit,
    ArrayStore,
    Assign,
    Assume,
    Branch,
    Call,
    Drop,
    Goto,
    Print,
    Read,
    Return,
    Stop,
    VarDecl,
)
from sourir.ir.program import MAIN, InstructionStream, Location

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from sourir.interp.trace import Action
    from sourir.interp.values import Environment, Value
    from sourir.ir.expressions import Literal
    from sourir.ir.instructions import DeoptTarget, ExtraFrame, Instruction
    from sourir.ir.program import Program

logger = logging.getLogger(__name__)

_EMPTY: Final = InstructionStream(())


class FrameOrigin(enum.StrEnum):
    """How the current frame was entered."""

    START = "start"
    CALL = "call"
    DEOPT = "deopt"


@dataclasses.dataclass(slots=True)
class Continuation:
    """A suspended caller: where to resume, which variable receives the result, and the caller's environment."""

    function: str
    version: str
    instrs: InstructionStream
    return_label: str
    ret_var: str
    saved_env: Environment
    origin: FrameOrigin = FrameOrigin.CALL


@dataclasses.dataclass(slots=True)
class Configuration:
    """
    Machine state: program, current stream and label, call stack, heap and environment.

    After `stop` the stream is empty and `label` is None.
    """

    program: Program
    function: str
    version: str
    instrs: InstructionStream
    label: str | None
    stack: list[Continuation]
    heap: Heap
    env: Environment
    origin: FrameOrigin = FrameOrigin.START
    assumes_seen: int = 0
    """Number of assume instructions executed so far, used to address dynamic occurrences."""
    deopts: int = 0
    """Number of deoptimizations performed so far."""

    @classmethod
    def start(cls, program: Program) -> Configuration:
        """
        Start configuration: entry of the active version of `main`, empty stack, heap and environment.

        Args:
            program (Program): Program to run.

        Returns:
            Configuration: Initial configuration.

        Raises:
            ExecutionError: `UnknownFunction` if the program has no `main`.
        """
        if not program.has_function(MAIN):
            raise ExecutionError(kind=RuntimeErrorKind.UNKNOWN_FUNCTION, message="the program has no 'main'")
        main = program.function(MAIN).active
        return cls(program, MAIN, main.label, main.instrs, main.instrs.entry, [], Heap(), {})

    @property
    def terminated(self) -> bool:
        """
        Whether the configuration executed `stop`.

        Returns:
            bool: True once the stream is empty.
        """
        return self.label is None

    @property
    def location(self) -> Location | None:
        """
        Absolute location of the next instruction.

        Returns:
            Location | None: `F.V.L`, or None once terminated.
        """
        return None if self.label is None else Location(self.function, self.version, self.label)

    def frames(self) -> list[tuple[str, str, str | None, str | None, dict[str, Value]]]:
        """
        Comparable view of the current frame followed by the stack from top to bottom.

        Returns:
            list[tuple[str, str, str | None, str | None, dict[str, Value]]]: `(function, version, label, ret_var, env)`
                per frame; the current frame has no return variable.
        """
        view = [(self.function, self.version, self.label, None, dict(self.env))]
        view.extend(
            (frame.function, frame.version, frame.return_label, frame.ret_var, dict(frame.saved_env))
            for frame in reversed(self.stack)
        )
        return view


class InputCursor:
    """Replays an input script for `read` instructions."""

    def __init__(self, inputs: Iterable[Literal] = ()) -> None:
        self._inputs = tuple(inputs)
        self._position = 0

    @property
    def consumed(self) -> int:
        """
        Number of literals read so far.

        Returns:
            int: Consumed count.
        """
        return self._position

    def next(self) -> Literal:
        """
        Consume the next literal.

        Returns:
            Literal: Next input.

        Raises:
            ExecutionError: `InputExhausted` when the script is used up.
        """
        if self._position >= len(self._inputs):
            msg = f"the input script has only {len(self._inputs)} literals"
            raise ExecutionError(kind=RuntimeErrorKind.INPUT_EXHAUSTED, message=msg)
        literal = self._inputs[self._position]
        self._position += 1
        return literal


@dataclasses.dataclass(frozen=True, slots=True)
class ForcePolicy:
    """
    Selects dynamic assume occurrences that deoptimize regardless of their predicates.

    Occurrences are addressed by ordinal (0-based count of executed assumes) or by static location.
    """

    everything: bool = False
    ordinals: frozenset[int] = frozenset()
    locations: frozenset[Location] = frozenset()

    @classmethod
    def never(cls) -> ForcePolicy:
        """
        Policy forcing nothing.

        Returns:
            ForcePolicy: Empty policy.
        """
        return cls()

    @classmethod
    def always(cls) -> ForcePolicy:
        """
        Policy forcing every assume.

        Returns:
            ForcePolicy: Policy with `everything` set.
        """
        return cls(everything=True)

    @classmethod
    def at_ordinals(cls, *ordinals: int) -> ForcePolicy:
        """
        Policy forcing selected dynamic occurrences.

        Args:
            *ordinals (int): 0-based ordinals of executed assumes.

        Returns:
            ForcePolicy: Ordinal policy.
        """
        return cls(ordinals=frozenset(ordinals))

    @classmethod
    def at_locations(cls, *locations: Location) -> ForcePolicy:
        """
        Policy forcing every occurrence of selected assume sites.

        Args:
            *locations (Location): Static assume locations.

        Returns:
            ForcePolicy: Location policy.
        """
        return cls(locations=frozenset(locations))

    def forces(self, ordinal: int, location: Location) -> bool:
        """
        Check whether an occurrence is forced.

        Args:
            ordinal (int): 0-based ordinal of the occurrence.
            location (Location): Static location of the assume.

        Returns:
            bool: True if the occurrence must deoptimize.
        """
        return self.everything or ordinal in self.ordinals or location in self.locations


NEVER: Final = ForcePolicy.never()


def _fail(kind: RuntimeErrorKind, message: str) -> ExecutionError:
    return ExecutionError(kind=kind, message=message)


def _resolve_stream(program: Program, function: str, version: str, label: str) -> InstructionStream:
    if not program.has_function(function) or not program.function(function).has_version(version):
        raise _fail(RuntimeErrorKind.BAD_DEOPT_TARGET, f"{function}.{version} does not exist")
    instrs = program.stream(function, version)
    if label not in instrs:
        raise _fail(RuntimeErrorKind.BAD_DEOPT_TARGET, f"{function}.{version}.{label} does not exist")
    return instrs


def deoptimize(config: Configuration, target: DeoptTarget, extra_frames: Sequence[ExtraFrame] = ()) -> Configuration:
    """
    Transfer control to a deoptimization target.

    The new environment and the environments of the synthesized frames are all built from the environment being left.
    Frames are pushed so that the first listed one ends on top of the stack. The heap is not touched.

    Args:
        config (Configuration): Configuration to update in place.
        target (DeoptTarget): Where execution continues.
        extra_frames (Sequence[ExtraFrame]): Caller frames to synthesize.

    Returns:
        Configuration: The updated configuration.

    Raises:
        ExecutionError: `BadDeoptTarget` for missing targets, or any evaluation error of the varmaps.
    """  # noqa: DOC502
    instrs = _resolve_stream(config.program, target.function, target.version, target.label)
    old_env = config.env
    env = eval_varmap(config.heap, old_env, target.varmap)
    synthesized = [
        Continuation(
            function=frame.function,
            version=frame.version,
            instrs=_resolve_stream(config.program, frame.function, frame.version, frame.label),
            return_label=frame.label,
            ret_var=frame.ret_var,
            saved_env=eval_varmap(config.heap, old_env, frame.varmap),
            origin=FrameOrigin.DEOPT,
        )
        for frame in extra_frames
    ]
    logger.debug("Deoptimizing %s to %s with %d extra frames", config.location, target.location, len(synthesized))
    config.stack.extend(reversed(synthesized))
    config.function, config.version, config.instrs = target.function, target.version, instrs
    config.label = target.label
    config.env = env
    config.origin = FrameOrigin.DEOPT
    config.deopts += 1
    return config


def _advance(config: Configuration, label: str) -> None:
    try:
        config.label = config.instrs.next_label(label)
    except FallThroughEndError as e:
        raise _fail(RuntimeErrorKind.FALL_THROUGH_END, str(e)) from e


def _jump(config: Configuration, label: str) -> None:
    if label not in config.instrs:
        raise _fail(RuntimeErrorKind.UNKNOWN_LABEL, f"label {label!r} is not in {config.function}.{config.version}")
    config.label = label


def _require_bound(config: Configuration, name: str) -> None:
    if name not in config.env:
        raise _fail(RuntimeErrorKind.UNBOUND_VARIABLE, f"{name!r} is unbound")


def step(config: Configuration, inputs: InputCursor, *, policy: ForcePolicy = NEVER) -> Action | None:
    """
    Execute the instruction at the current label.

    Args:
        config (Configuration): Configuration to update in place. Must not be terminated.
        inputs (InputCursor): Source of `read` literals.
        policy (ForcePolicy): Assume occurrences to deoptimize unconditionally. Default forces nothing.

    Returns:
        Action | None: The emitted action, or None for silent steps.

    Raises:
        ExecutionError: If the configuration is stuck; the error carries the location of the instruction.
    """
    location = config.location
    if location is None:
        msg = "A terminated configuration cannot step."
        raise RuntimeError(msg)
    try:
        return _execute(config, location, config.instrs.lookup(location.label), inputs, policy)
    except ExecutionError as e:
        raise e.at(str(location)) from e


def _execute(  # noqa: C901, PLR0912, PLR0915
    config: Configuration,
    location: Location,
    instr: Instruction,
    inputs: InputCursor,
    policy: ForcePolicy,
) -> Action | None:
    label = location.label
    heap, env = config.heap, config.env
    action: Action | None = None
    match instr:
        case VarDecl(name, expr):
            env[name] = eval_expr(heap, env, expr)
            _advance(config, label)
        case Drop(name):
            _require_bound(config, name)
            del env[name]
            _advance(config, label)
        case Assign(name, expr):
            _require_bound(config, name)
            env[name] = eval_expr(heap, env, expr)
            _advance(config, label)
        case ArrayAlloc(name, size_expr):
            size = as_int(eval_expr(heap, env, size_expr), "array size")
            if not 0 <= size <= MAX_ARRAY_LENGTH:
                raise _fail(RuntimeErrorKind.INVALID_ARRAY_SIZE, f"cannot allocate an array of {size} cells")
            env[name] = heap.allocate([NIL] * size)
            _advance(config, label)
        case ArrayLit(name, elements):
            env[name] = heap.allocate([eval_expr(heap, env, element) for element in elements])
            _advance(config, label)
        case ArrayStore(name, index_expr, value_expr):
            _require_bound(config, name)
            address = as_address(env[name], "stored-to value")
            index = as_int(eval_expr(heap, env, index_expr), "index")
            heap.store(address, index, eval_expr(heap, env, value_expr))
            _advance(config, label)
        case Branch(cond, then_label, else_label):
            _jump(config, then_label if as_bool(eval_expr(heap, env, cond), "branch condition") else else_label)
        case Goto(target):
            _jump(config, target)
        case Print(expr):
            value = eval_expr(heap, env, expr)
            if not isinstance(value, LITERAL_TYPES):
                raise _fail(RuntimeErrorKind.TYPE_ERROR, f"cannot print {describe(value)}")
            action = PrintAction(value)
            _advance(config, label)
        case Read(name):
            _require_bound(config, name)
            literal = inputs.next()
            env[name] = literal
            action = ReadAction(literal)
            _advance(config, label)
        case Call(name, callee_expr, arg_exprs):
            _call(config, label, name, eval_expr(heap, env, callee_expr), [eval_expr(heap, env, a) for a in arg_exprs])
        case Return(expr):
            value = eval_expr(heap, env, expr)
            if not config.stack:
                raise _fail(RuntimeErrorKind.RETURN_FROM_MAIN, "return with an empty call stack")
            frame = config.stack.pop()
            config.function, config.version, config.instrs = frame.function, frame.version, frame.instrs
            config.env = {**frame.saved_env, frame.ret_var: value}
            config.origin = frame.origin
            _jump(config, frame.return_label)
        case Assume(predicates, target, extra_frames):
            ordinal = config.assumes_seen
            config.assumes_seen += 1
            holds = all(as_bool(eval_expr(heap, env, p), "assume predicate") for p in predicates)
            if holds and not policy.forces(ordinal, location):
                _advance(config, label)
            else:
                deoptimize(config, target, extra_frames)
        case Stop():
            config.instrs, config.label = _EMPTY, None
            action = StopAction()
    return action


def _call(config: Configuration, label: str, name: str, callee: Value, args: list[Value]) -> None:
    if not isinstance(callee, FunValue):
        raise _fail(RuntimeErrorKind.CALLEE_NOT_FUNCTION, f"cannot call {describe(callee)}")
    if not config.program.has_function(callee.name):
        raise _fail(RuntimeErrorKind.UNKNOWN_FUNCTION, f"function {callee.name!r} is not defined")
    function = config.program.function(callee.name)
    if len(args) != len(function.params):
        msg = f"{callee.name} takes {len(function.params)} arguments, got {len(args)}"
        raise _fail(RuntimeErrorKind.CALL_ARITY_MISMATCH, msg)
    try:
        return_label = config.instrs.next_label(label)
    except FallThroughEndError as e:
        raise _fail(RuntimeErrorKind.FALL_THROUGH_END, str(e)) from e
    config.stack.append(
        Continuation(config.function, config.version, config.instrs, return_label, name, config.env, config.origin),
    )
    active = function.active
    config.function, config.version, config.instrs = function.name, active.label, active.instrs
    config.label = active.instrs.entry
    config.env = dict(zip(function.params, args, strict=True))
    config.origin = FrameOrigin.CALL

