from __future__ import annotations

__all__ = ["IPass", "PassBase", "PassRegistry", "PassReport"]

import abc
import dataclasses
from collections.abc import Iterator, MutableMapping
from typing import TYPE_CHECKING, ClassVar, Protocol

from sourir.errors import (
    CannotDeletePassError,
    CannotReplacePassError,
    InvalidPassArgumentsError,
    PassIsNotRegisteredError,
)

if TYPE_CHECKING:
    from collections.abc import Mapping

    from sourir.ir.program import Program


@dataclasses.dataclass(frozen=True, slots=True)
class PassReport:
    """Summary of one pass application."""

    pass_name: str
    changed: bool
    """False only if the output program equals the input program."""
    rewrites: int = 0
    """Number of instructions added, removed or rewritten."""
    notes: tuple[str, ...] = ()

    @classmethod
    def compare(cls, pass_name: str, before: Program, after: Program, rewrites: int, *notes: str) -> PassReport:
        """
        Build a report whose `changed` flag is derived from structural equality.

        Args:
            pass_name (str): Pipeline name of the pass.
            before (Program): Input program.
            after (Program): Output program.
            rewrites (int): Number of edits performed.
            *notes (str): Free-form remarks.

        Returns:
            PassReport: Report.
        """
        changed = before != after
        return cls(pass_name, changed, rewrites if changed else 0, notes)

    def render(self) -> str:
        """
        Render the report as one line.

        Returns:
            str: `name: changed|unchanged (n rewrites)` followed by notes.
        """
        status = f"changed ({self.rewrites} rewrites)" if self.changed else "unchanged"
        notes = "".join(f"; {note}" for note in self.notes)
        return f"{self.pass_name}: {status}{notes}"


class IPass(Protocol):
    """
    Protocol describing an object that may be registered as a pipeline pass.

    A pass receives the program and the `arg=value` pairs of its pipeline invocation, both as written in the pipeline
    file, and returns the transformed program together with a report.
    """

    def __call__(self, program: Program, arguments: Mapping[str, str]) -> tuple[Program, PassReport]:
        """
        Apply the pass.

        Args:
            program (Program): Input program.
            arguments (Mapping[str, str]): Invocation arguments.

        Returns:
            tuple[Program, PassReport]: Output program and report.
        """
        ...


class PassBase(IPass, abc.ABC):
    """
    Implementation of the `IPass` protocol as a callable class validating its arguments.

    NOTE: inherited passes declare their accepted arguments in `_REQUIRED` and `_OPTIONAL`.
    """

    name: ClassVar[str] = ""
    _REQUIRED: ClassVar[tuple[str, ...]] = ()
    _OPTIONAL: ClassVar[tuple[str, ...]] = ()

    def __call__(self, program: Program, arguments: Mapping[str, str]) -> tuple[Program, PassReport]:
        """
        Validate the arguments and apply the pass.

        Args:
            program (Program): Input program.
            arguments (Mapping[str, str]): Invocation arguments.

        Returns:
            tuple[Program, PassReport]: Output program and report.

        Raises:
            InvalidPassArgumentsError: If an argument is missing or not accepted by the pass.
        """
        missing = [key for key in self._REQUIRED if key not in arguments]
        if missing:
            raise InvalidPassArgumentsError(pass_name=self.name, reason=f"missing {', '.join(missing)}")
        unknown = sorted(set(arguments) - set(self._REQUIRED) - set(self._OPTIONAL))
        if unknown:
            raise InvalidPassArgumentsError(pass_name=self.name, reason=f"unexpected {', '.join(unknown)}")
        return self._apply(program, arguments)

    @abc.abstractmethod
    def _apply(self, program: Program, arguments: Mapping[str, str]) -> tuple[Program, PassReport]:
        """
        Apply the actual transformation.

        Args:
            program (Program): Input program.
            arguments (Mapping[str, str]): Validated invocation arguments.

        Returns:
            tuple[Program, PassReport]: Output program and report.
        """


class PassRegistry(MutableMapping[str, IPass]):
    """Collection of passes addressable by their pipeline name."""

    _passes: dict[str, IPass]
    """
    Pipeline name to pass object.

    A pass object must implement the `IPass` protocol, so it may be an instance of a `PassBase` subclass or any
    function that repeats the protocol.
    """

    def __init__(self, passes: dict[str, IPass] | None = None) -> None:
        """
        Initialize the registry.

        Args:
            passes (dict[str, IPass] | None): Passes to start with.
        """
        self._passes = dict(passes or {})

    def register(self, name: str, pass_: IPass, *, replace: bool = False) -> None:
        """
        Register a pass under a name.

        Args:
            name (str): Pipeline name.
            pass_ (IPass): Pass object.
            replace (bool): Flag to replace an already registered pass. Default is False.

        Raises:
            CannotReplacePassError: If the name is taken and `replace` is not set.
        """
        if name in self._passes and not replace:
            msg = f"Pass {name!r} is already registered. Use `replace=True` if you want to replace it intentionally."
            raise CannotReplacePassError(msg)
        self._passes[name] = pass_

    def __setitem__(self, key: str, value: IPass, /) -> None:
        self._passes[key] = value

    def __delitem__(self, key: str, /) -> None:
        """
        Remove a pass.

        Args:
            key (str): Pipeline name.

        Raises:
            CannotDeletePassError: If no pass has that name.
        """
        try:
            del self._passes[key]
        except KeyError as e:
            msg = f"Pass {key!r} is not found."
            raise CannotDeletePassError(msg) from e

    def __getitem__(self, key: str, /) -> IPass:
        """
        Get a pass by its pipeline name.

        Args:
            key (str): Pipeline name.

        Returns:
            IPass: Pass object.

        Raises:
            PassIsNotRegisteredError: If no pass has that name.
        """
        try:
            return self._passes[key]
        except KeyError as e:
            msg = f"Pass {key!r} is not registered. Known passes: {', '.join(sorted(self._passes))}."
            raise PassIsNotRegisteredError(msg) from e

    def __len__(self) -> int:
        return len(self._passes)

    def __iter__(self) -> Iterator[str]:
        return iter(self._passes)
