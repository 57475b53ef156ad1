from __future__ import annotations

__all__ = ["ScopeMap", "deopt_entry_labels", "scope_at", "transfer_scope"]

from collections import deque
from collections.abc import Iterator, Mapping
from typing import TYPE_CHECKING

from sourir.errors import FallThroughEndError, ScopeMismatchError, UnknownLabelError
from sourir.ir.instructions import Drop, declared_var

if TYPE_CHECKING:
    from sourir.ir.instructions import Instruction
    from sourir.ir.program import InstructionStream, Program


def transfer_scope(scope: frozenset[str], instr: Instruction) -> frozenset[str]:
    """
    Scope after an instruction, given the scope before it.

    Args:
        scope (frozenset[str]): Declared variables before the instruction.
        instr (Instruction): Instruction to apply.

    Returns:
        frozenset[str]: Declared variables after the instruction.
    """
    if (name := declared_var(instr)) is not None:
        return scope | {name}
    if isinstance(instr, Drop):
        return scope - {instr.name}
    return scope


class ScopeMap(Mapping[str, frozenset[str]]):
    """
    Declared variables on entry to every label of one version.

    Labels that are neither reachable from the entry nor from a deoptimization entry have no scope and are absent.
    """

    def __init__(self, function: str, version: str, scopes: dict[str, frozenset[str]]) -> None:
        """
        Args:
            function (str): Function the version belongs to.
            version (str): Version label.
            scopes (dict[str, frozenset[str]]): Label to the declared variables on entry.
        """  # noqa: D205
        self._function = function
        self._version = version
        self._scopes = scopes

    @property
    def function(self) -> str:
        """
        Function the scopes were computed for.

        Returns:
            str: Function name.
        """
        return self._function

    @property
    def version(self) -> str:
        """
        Version the scopes were computed for.

        Returns:
            str: Version label.
        """
        return self._version

    def __getitem__(self, label: str, /) -> frozenset[str]:
        """
        Get the scope on entry to a label.

        Args:
            label (str): Label to look up.

        Returns:
            frozenset[str]: Declared variables.

        Raises:
            UnknownLabelError: If the label is unknown or unreachable.
        """
        try:
            return self._scopes[label]
        except KeyError as e:
            msg = f"No scope is known at {self._function}.{self._version}.{label}; the label is absent or unreachable."
            raise UnknownLabelError(label=label, message=msg) from e

    def __len__(self) -> int:
        return len(self._scopes)

    def __iter__(self) -> Iterator[str]:
        return iter(self._scopes)

    def __repr__(self) -> str:
        return f"ScopeMap({self._function}.{self._version}, {self._scopes!r})"


def successors_within(instrs: InstructionStream, label: str) -> frozenset[str]:
    """
    Successors of a label that exist in the stream; falling off the end leads nowhere.

    Args:
        instrs (InstructionStream): Stream to look in.
        label (str): Label whose successors are wanted.

    Returns:
        frozenset[str]: Existing successor labels.
    """
    try:
        return frozenset(successor for successor in instrs.successors(label) if successor in instrs)
    except FallThroughEndError:
        return frozenset()


def scope_at(program: Program, function: str, version: str, *, depth_first: bool = False) -> ScopeMap:
    """
    Compute the declared variables on entry to every label of `function.version`.

    The entry label is seeded with the parameters. Labels that deoptimization metadata anywhere in the program enters
    and that are not reachable from the entry are seeded with the variables that metadata installs.

    Args:
        program (Program): Program holding the version.
        function (str): Function name.
        version (str): Version label.
        depth_first (bool): Visit the worklist last-in first-out instead of breadth-first. The result does not depend
            on it. Default is False.

    Returns:
        ScopeMap: Scope per label.

    Raises:
        ScopeMismatchError: If two control-flow edges reach a label with different scopes.
    """
    owner = program.function(function)
    instrs = owner.version(version)
    scopes: dict[str, frozenset[str]] = {}
    if not len(instrs):
        return ScopeMap(function, version, scopes)

    def propagate(seed_label: str, seed: frozenset[str]) -> None:
        scopes[seed_label] = seed
        worklist = deque([seed_label])
        while worklist:
            label = worklist.pop() if depth_first else worklist.popleft()
            after = transfer_scope(scopes[label], instrs.lookup(label))
            for successor in sorted(successors_within(instrs, label)):
                known = scopes.get(successor)
                if known is None:
                    scopes[successor] = after
                    worklist.append(successor)
                elif known != after:
                    raise ScopeMismatchError(label=successor, first=known, second=after)

    propagate(instrs.entry, frozenset(owner.params))
    for location, incoming in sorted(program.deopt_entries().items()):
        if (location.function, location.version) != (function, version) or location.label not in instrs:
            continue
        if location.label in scopes:
            continue
        propagate(location.label, incoming[0][1])
    return ScopeMap(function, version, scopes)


def deopt_entry_labels(program: Program, function: str, version: str) -> frozenset[str]:
    """
    Labels of `function.version` that deoptimization metadata anywhere in the program enters.

    Args:
        program (Program): Program to scan.
        function (str): Function name.
        version (str): Version label.

    Returns:
        frozenset[str]: Entered labels.
    """
    return frozenset(
        location.label
        for location in program.deopt_entries()
        if (location.function, location.version) == (function, version)
    )
