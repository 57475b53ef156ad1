from __future__ import annotations

import abc
import enum
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from collections.abc import Collection, Sequence

    from sourir.analysis.checker import Diagnostic


class SourirError(Exception, abc.ABC):
    """Base class for all exceptions raised by sourir."""


# IR structure


class UnknownLabelError(SourirError, KeyError):
    """Raised in case a label is not present in an instruction stream."""

    def __init__(self, *args: Any, label: str, message: str | None = None) -> None:  # noqa: ANN401
        if not message:
            message = f"Label {label!r} is not present in the instruction stream."
        super().__init__(message, *args)
        self.label = label

    def __str__(self) -> str:
        return str(self.args[0])


class UnknownFunctionError(SourirError, KeyError):
    """Raised in case a function is not defined by the program."""

    def __init__(self, *args: Any, function: str, message: str | None = None) -> None:  # noqa: ANN401
        if not message:
            message = f"Function {function!r} is not defined."
        super().__init__(message, *args)
        self.function = function

    def __str__(self) -> str:
        return str(self.args[0])


class UnknownVersionError(SourirError, KeyError):
    """Raised in case a function has no version with the requested label."""

    def __init__(self, *args: Any, function: str, version: str, message: str | None = None) -> None:  # noqa: ANN401
        if not message:
            message = f"Function {function!r} has no version {version!r}."
        super().__init__(message, *args)
        self.function = function
        self.version = version

    def __str__(self) -> str:
        return str(self.args[0])


class FallThroughEndError(SourirError, ValueError):
    """Raised in case a fall-through instruction is the last one of its stream."""

    def __init__(self, *args: Any, label: str, message: str | None = None) -> None:  # noqa: ANN401
        if not message:
            message = f"Instruction at {label!r} falls through the end of the stream."
        super().__init__(message, *args)
        self.label = label


class DuplicateNameError(SourirError, ValueError):
    """Raised in case a function, version or label name is defined twice in the same container."""

    def __init__(self, *args: Any, kind: str, name: str, message: str | None = None) -> None:  # noqa: ANN401
        if not message:
            message = f"Duplicate {kind} name {name!r}."
        super().__init__(message, *args)
        self.kind = kind
        self.name = name


class InvalidProgramError(SourirError, ValueError):
    """Raised in case an IR node is constructed with inconsistent data."""


# Text format


class ParseError(SourirError, ValueError):
    """Raised in case a source text does not follow the sourir grammar."""

    def __init__(self, *args: Any, line: int, column: int, reason: str, message: str | None = None) -> None:  # noqa: ANN401
        if not message:
            message = f"{line}:{column}: {reason}"
        super().__init__(message, *args)
        self.line = line
        self.column = column
        self.reason = reason


class NestedExpressionError(ParseError):
    """Raised in case an operation operand is not a simple expression."""


# Analysis


class ScopeMismatchError(SourirError, ValueError):
    """Raised in case two control-flow edges reach a label with different sets of declared variables."""

    def __init__(
        self,
        *args: Any,  # noqa: ANN401
        label: str,
        first: Collection[str],
        second: Collection[str],
        message: str | None = None,
    ) -> None:
        if not message:
            message = f"Scope mismatch at {label!r}: {{{', '.join(sorted(first))}}} vs {{{', '.join(sorted(second))}}}."
        super().__init__(message, *args)
        self.label = label
        self.first = frozenset(first)
        self.second = frozenset(second)


# Interpreter


class RuntimeErrorKind(enum.StrEnum):
    """Closed set of reasons a configuration gets stuck."""

    TYPE_ERROR = "TypeError"
    INDEX_OUT_OF_BOUNDS = "IndexOutOfBounds"
    DIVISION_BY_ZERO = "DivisionByZero"
    INTEGER_OVERFLOW = "IntegerOverflow"
    UNBOUND_VARIABLE = "UnboundVariable"
    UNKNOWN_LABEL = "UnknownLabel"
    UNKNOWN_FUNCTION = "UnknownFunction"
    CALL_ARITY_MISMATCH = "CallArityMismatch"
    CALLEE_NOT_FUNCTION = "CalleeNotFunction"
    RETURN_FROM_MAIN = "ReturnFromMain"
    INPUT_EXHAUSTED = "InputExhausted"
    BAD_DEOPT_TARGET = "BadDeoptTarget"
    INVALID_ARRAY_SIZE = "InvalidArraySize"
    FALL_THROUGH_END = "FallThroughEnd"


class ExecutionError(SourirError, RuntimeError):
    """
    Raised by the abstract machine when a configuration cannot make progress.

    `location` is filled in by the machine once the failing instruction is known; evaluation helpers raise the error
    without it.
    """

    def __init__(
        self,
        *args: Any,  # noqa: ANN401
        kind: RuntimeErrorKind,
        location: str | None = None,
        message: str | None = None,
    ) -> None:
        if not message:
            message = kind.value
        super().__init__(message, *args)
        self.kind = kind
        self.location = location
        self.message = message

    def at(self, location: str) -> ExecutionError:
        """
        Return a copy of the error bound to a program location.

        Args:
            location (str): Location in the `F.V.L` form.

        Returns:
            ExecutionError: Error with the location set.
        """
        return ExecutionError(kind=self.kind, location=location, message=self.message)


# Passes


class PassError(SourirError, ValueError):
    """Base class for precondition failures of program transformations."""


class DuplicateVersionLabelError(PassError):
    """Raised in case a new version label is already used by the function."""

    def __init__(self, *args: Any, function: str, version: str, message: str | None = None) -> None:  # noqa: ANN401
        if not message:
            message = f"Function {function!r} already has a version {version!r}."
        super().__init__(message, *args)
        self.function = function
        self.version = version


class NotAnAssumeError(PassError):
    """Raised in case a pass expects an assume instruction at a label."""

    def __init__(self, *args: Any, location: str, message: str | None = None) -> None:  # noqa: ANN401
        if not message:
            message = f"Instruction at {location} is not an assume."
        super().__init__(message, *args)
        self.location = location


class NotACallError(PassError):
    """Raised in case inlining is requested at a label that does not hold a call."""

    def __init__(self, *args: Any, location: str, message: str | None = None) -> None:  # noqa: ANN401
        if not message:
            message = f"Instruction at {location} is not a call."
        super().__init__(message, *args)
        self.location = location


class NotADirectCallError(PassError):
    """Raised in case inlining is requested for a call whose callee is not a function reference."""

    def __init__(self, *args: Any, location: str, message: str | None = None) -> None:  # noqa: ANN401
        if not message:
            message = f"Call at {location} is not a direct call."
        super().__init__(message, *args)
        self.location = location


class CallArityMismatchError(PassError):
    """Raised in case a direct call passes a different number of arguments than the callee declares."""


class NotTrivialError(PassError):
    """Raised in case an assume still carries a predicate other than the literal `true`."""

    def __init__(self, *args: Any, location: str, message: str | None = None) -> None:  # noqa: ANN401
        if not message:
            message = f"Assume at {location} is not trivial."
        super().__init__(message, *args)
        self.location = location


class MoveConditionViolatedError(PassError):
    """Raised in case an assume cannot be moved past the following instruction."""

    def __init__(self, *args: Any, condition: int, location: str, message: str | None = None) -> None:  # noqa: ANN401
        if not message:
            message = f"Cannot move the assume at {location}: condition {condition} is violated."
        super().__init__(message, *args)
        self.condition = condition
        self.location = location


class TargetNotAssumeError(PassError):
    """Raised in case assume composition finds something other than an assume at the deoptimization target."""


class BadDeoptTargetError(PassError):
    """Raised in case a deoptimization target does not exist or does not fit the target scope."""


class OutOfScopeError(PassError):
    """Raised in case a predicate would be placed where some of its variables are not declared."""

    def __init__(self, *args: Any, location: str, variables: Collection[str], message: str | None = None) -> None:  # noqa: ANN401
        if not message:
            message = f"Variables {sorted(variables)!r} are not in scope at {location}."
        super().__init__(message, *args)
        self.location = location
        self.variables = frozenset(variables)


class UnboundVariableError(PassError):
    """Raised in case a pass argument mentions a variable that is not in scope."""

    def __init__(self, *args: Any, location: str, variables: Collection[str], message: str | None = None) -> None:  # noqa: ANN401
        if not message:
            message = f"Variables {sorted(variables)!r} are unbound at {location}."
        super().__init__(message, *args)
        self.location = location
        self.variables = frozenset(variables)


class PredIndexOutOfRangeError(PassError, IndexError):
    """Raised in case a predicate index does not address a predicate of the assume."""


class CompositionNestingError(PassError):
    """Raised in case composing varmaps would produce a nested expression."""


class VersionInUseError(PassError):
    """Raised in case a version cannot be discarded because something still depends on it."""


class PipelineAbortedError(PassError):
    """Raised in case a pipeline stage fails or produces an ill-formed program."""

    def __init__(
        self,
        *args: Any,  # noqa: ANN401
        stage: int,
        pass_name: str,
        diagnostics: Sequence[Diagnostic] = (),
        reason: str | None = None,
        message: str | None = None,
    ) -> None:
        if not message:
            detail = reason or "; ".join(d.render() for d in diagnostics)
            message = f"Pipeline aborted at stage {stage} ({pass_name}): {detail}"
        super().__init__(message, *args)
        self.stage = stage
        self.pass_name = pass_name
        self.diagnostics = tuple(diagnostics)
        self.reason = reason


class PassIsNotRegisteredError(SourirError, KeyError):
    """Raised in case a pass name is not registered in the pass registry."""


class CannotReplacePassError(SourirError, KeyError):
    """Raised in case a pass is already registered under the requested name."""


class CannotDeletePassError(SourirError, KeyError):
    """Raised in case a pass cannot be deleted from the registry."""


class InvalidPassArgumentsError(SourirError, ValueError):
    """Raised in case a pipeline invocation carries missing or malformed arguments."""

    def __init__(self, *args: Any, pass_name: str, reason: str, message: str | None = None) -> None:  # noqa: ANN401
        if not message:
            message = f"Invalid arguments for pass {pass_name!r}: {reason}"
        super().__init__(message, *args)
        self.pass_name = pass_name
        self.reason = reason


# Configuration and command line


class InvalidConfigError(SourirError, ValueError):
    """Raised in case a generator configuration is out of its valid ranges."""

    def __init__(self, *args: Any, field: str, reason: str, message: str | None = None) -> None:  # noqa: ANN401
        if not message:
            message = f"Field {field!r} of the generator configuration is invalid. Reason: {reason!r}"
        super().__init__(message, *args)
        self.field = field
        self.reason = reason


class UsageError(SourirError, ValueError):
    """Raised in case the command line is malformed."""
