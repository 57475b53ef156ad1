from __future__ import annotations

import dataclasses
from typing import TYPE_CHECKING

from sourir.errors import (
    DuplicateNameError,
    FallThroughEndError,
    InvalidProgramError,
    UnknownFunctionError,
    UnknownLabelError,
    UnknownVersionError,
)
from sourir.ir.instructions import Assume, falls_through, jump_targets

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable, Iterator

    from sourir.ir.instructions import Instruction

MAIN = "main"


@dataclasses.dataclass(frozen=True, slots=True, order=True)
class Location:
    """Absolute reference `F.V.L` to an instruction."""

    function: str
    version: str
    label: str

    def __str__(self) -> str:
        return f"{self.function}.{self.version}.{self.label}"


@dataclasses.dataclass(frozen=True, slots=True)
class InstructionStream:
    """
    Ordered sequence of labeled instructions of one version.

    Every instruction carries a label; labels are unique within the stream. The first instruction is the entry.
    """

    instrs: tuple[tuple[str, Instruction], ...]
    _positions: dict[str, int] = dataclasses.field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        positions: dict[str, int] = {}
        for index, (label, _) in enumerate(self.instrs):
            if label in positions:
                raise DuplicateNameError(kind="label", name=label)
            positions[label] = index
        object.__setattr__(self, "_positions", positions)

    @classmethod
    def of(cls, pairs: Iterable[tuple[str, Instruction]]) -> InstructionStream:
        """
        Build a stream from `(label, instruction)` pairs.

        Args:
            pairs (Iterable[tuple[str, Instruction]]): Labeled instructions in stream order.

        Returns:
            InstructionStream: New stream.
        """
        return cls(tuple(pairs))

    def __len__(self) -> int:
        return len(self.instrs)

    def __iter__(self) -> Iterator[tuple[str, Instruction]]:
        return iter(self.instrs)

    def __contains__(self, label: object) -> bool:
        return label in self._positions

    @property
    def labels(self) -> tuple[str, ...]:
        """
        Labels in stream order.

        Returns:
            tuple[str, ...]: All labels.
        """
        return tuple(label for label, _ in self.instrs)

    @property
    def entry(self) -> str:
        """
        Label of the first instruction.

        Returns:
            str: Entry label.

        Raises:
            InvalidProgramError: If the stream is empty.
        """
        if not self.instrs:
            msg = "An empty instruction stream has no entry label."
            raise InvalidProgramError(msg)
        return self.instrs[0][0]

    def index_of(self, label: str) -> int:
        """
        Position of a label in the stream.

        Args:
            label (str): Label to find.

        Returns:
            int: Zero-based position.

        Raises:
            UnknownLabelError: If the label is absent.
        """
        try:
            return self._positions[label]
        except KeyError as e:
            raise UnknownLabelError(label=label) from e

    def lookup(self, label: str) -> Instruction:
        """
        Instruction at a label.

        Args:
            label (str): Label to look up.

        Returns:
            Instruction: The labeled instruction.
        """
        return self.instrs[self.index_of(label)][1]

    def next_label(self, label: str) -> str:
        """
        Label of the instruction right after `label` in stream order.

        Args:
            label (str): Current label.

        Returns:
            str: Following label.

        Raises:
            FallThroughEndError: If `label` is the last instruction.
        """
        index = self.index_of(label) + 1
        if index >= len(self.instrs):
            raise FallThroughEndError(label=label)
        return self.instrs[index][0]

    def successors(self, label: str) -> frozenset[str]:
        """
        Control-flow successors of an instruction.

        Args:
            label (str): Label of the instruction.

        Returns:
            frozenset[str]: Jump targets for `goto`/`branch`, nothing for `return`/`stop`, the next label otherwise.
        """
        instr = self.lookup(label)
        if falls_through(instr):
            return frozenset({self.next_label(label)})
        return frozenset(jump_targets(instr))

    def edges(self) -> Iterator[tuple[str, str]]:
        """
        Iterate over all control-flow edges of the stream.

        A last instruction that falls through has no edge out; the checker reports it.

        Yields:
            tuple[str, str]: `(source, target)` pairs.
        """
        for label, _ in self.instrs:
            try:
                successors = self.successors(label)
            except FallThroughEndError:
                continue
            for successor in successors:
                yield label, successor

    def predecessor_map(self) -> dict[str, frozenset[str]]:
        """
        Predecessors of every label at once.

        Returns:
            dict[str, frozenset[str]]: Label to the labels with an edge into it.
        """
        result: dict[str, set[str]] = {label: set() for label, _ in self.instrs}
        for source, target in self.edges():
            if target in result:
                result[target].add(source)
        return {label: frozenset(sources) for label, sources in result.items()}

    def predecessors(self, label: str) -> frozenset[str]:
        """
        Control-flow predecessors of an instruction.

        Args:
            label (str): Label of the instruction.

        Returns:
            frozenset[str]: Labels whose successors contain `label`.
        """
        self.index_of(label)
        return self.predecessor_map()[label]

    def replace(self, label: str, instr: Instruction) -> InstructionStream:
        """
        Return a copy with the instruction at `label` replaced.

        Args:
            label (str): Label to rewrite.
            instr (Instruction): New instruction.

        Returns:
            InstructionStream: New stream.
        """
        index = self.index_of(label)
        return InstructionStream((*self.instrs[:index], (label, instr), *self.instrs[index + 1 :]))

    def splice(self, index: int, pairs: Iterable[tuple[str, Instruction]], *, remove: int = 0) -> InstructionStream:
        """
        Return a copy with `remove` instructions at `index` replaced by `pairs`.

        Args:
            index (int): Position of the edit.
            pairs (Iterable[tuple[str, Instruction]]): Labeled instructions to insert.
            remove (int): Number of instructions removed at `index`. Default is 0.

        Returns:
            InstructionStream: New stream.
        """
        return InstructionStream((*self.instrs[:index], *pairs, *self.instrs[index + remove :]))

    def map(self, fn: Callable[[str, Instruction], Instruction]) -> InstructionStream:
        """
        Return a copy with every instruction rewritten, labels kept.

        Args:
            fn (Callable[[str, Instruction], Instruction]): Rewriting receiving the label and the instruction.

        Returns:
            InstructionStream: New stream.
        """
        return InstructionStream(tuple((label, fn(label, instr)) for label, instr in self.instrs))


@dataclasses.dataclass(frozen=True, slots=True)
class Version:
    """A named variant of a function body."""

    label: str
    instrs: InstructionStream


@dataclasses.dataclass(frozen=True, slots=True)
class Function:
    """A function: parameters plus its versions, the first of which is active."""

    name: str
    params: tuple[str, ...]
    versions: tuple[Version, ...]

    def __post_init__(self) -> None:
        if not self.versions:
            msg = f"Function {self.name!r} has no version."
            raise InvalidProgramError(msg)
        seen: set[str] = set()
        for version in self.versions:
            if version.label in seen:
                raise DuplicateNameError(kind="version", name=f"{self.name}.{version.label}")
            seen.add(version.label)
        if len(set(self.params)) != len(self.params):
            raise DuplicateNameError(kind="parameter", name=f"{self.name}({', '.join(self.params)})")

    @property
    def active(self) -> Version:
        """
        Version executed by calls.

        Returns:
            Version: First version of the function.
        """
        return self.versions[0]

    @property
    def version_labels(self) -> tuple[str, ...]:
        """
        Labels of all versions, active first.

        Returns:
            tuple[str, ...]: Version labels.
        """
        return tuple(version.label for version in self.versions)

    def has_version(self, label: str) -> bool:
        """
        Check whether the function has a version.

        Args:
            label (str): Version label.

        Returns:
            bool: True if the version exists.
        """
        return any(version.label == label for version in self.versions)

    def version(self, label: str) -> InstructionStream:
        """
        Instruction stream of a version.

        Args:
            label (str): Version label.

        Returns:
            InstructionStream: The version's instructions.

        Raises:
            UnknownVersionError: If the function has no such version.
        """
        for version in self.versions:
            if version.label == label:
                return version.instrs
        raise UnknownVersionError(function=self.name, version=label)

    def version_after(self, label: str) -> str | None:
        """
        Label of the version listed right after `label`, the one a fresh version was copied from.

        Args:
            label (str): Version label.

        Returns:
            str | None: Following version label, or None if `label` is the last one.

        Raises:
            UnknownVersionError: If the function has no such version.
        """
        labels = self.version_labels
        if label not in labels:
            raise UnknownVersionError(function=self.name, version=label)
        index = labels.index(label) + 1
        return labels[index] if index < len(labels) else None

    def with_version(self, label: str, instrs: InstructionStream) -> Function:
        """
        Return a copy with the stream of an existing version replaced.

        Args:
            label (str): Version label.
            instrs (InstructionStream): New stream.

        Returns:
            Function: New function.
        """
        self.version(label)
        versions = tuple(Version(label, instrs) if v.label == label else v for v in self.versions)
        return dataclasses.replace(self, versions=versions)

    def with_new_active(self, label: str, instrs: InstructionStream) -> Function:
        """
        Return a copy with a new version prepended, becoming active.

        Args:
            label (str): New version label.
            instrs (InstructionStream): New stream.

        Returns:
            Function: New function.
        """
        return dataclasses.replace(self, versions=(Version(label, instrs), *self.versions))

    def with_active(self, label: str) -> Function:
        """
        Return a copy where `label` is moved to the front; the order of the others is kept.

        Args:
            label (str): Version to activate.

        Returns:
            Function: New function.
        """
        instrs = self.version(label)
        rest = tuple(v for v in self.versions if v.label != label)
        return dataclasses.replace(self, versions=(Version(label, instrs), *rest))

    def without_version(self, label: str) -> Function:
        """
        Return a copy without a version.

        Args:
            label (str): Version to remove.

        Returns:
            Function: New function.
        """
        self.version(label)
        return dataclasses.replace(self, versions=tuple(v for v in self.versions if v.label != label))


@dataclasses.dataclass(frozen=True, slots=True)
class Program:
    """A list of named functions, one of which is `main`."""

    functions: tuple[Function, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for function in self.functions:
            if function.name in seen:
                raise DuplicateNameError(kind="function", name=function.name)
            seen.add(function.name)

    def __iter__(self) -> Iterator[Function]:
        return iter(self.functions)

    @property
    def function_names(self) -> tuple[str, ...]:
        """
        Names of all functions, in program order.

        Returns:
            tuple[str, ...]: Function names.
        """
        return tuple(function.name for function in self.functions)

    def has_function(self, name: str) -> bool:
        """
        Check whether the program defines a function.

        Args:
            name (str): Function name.

        Returns:
            bool: True if defined.
        """
        return any(function.name == name for function in self.functions)

    def function(self, name: str) -> Function:
        """
        Function by name.

        Args:
            name (str): Function name.

        Returns:
            Function: The function.

        Raises:
            UnknownFunctionError: If the program does not define it.
        """
        for function in self.functions:
            if function.name == name:
                return function
        raise UnknownFunctionError(function=name)

    def stream(self, function: str, version: str) -> InstructionStream:
        """
        Instruction stream of `function.version`.

        Args:
            function (str): Function name.
            version (str): Version label.

        Returns:
            InstructionStream: The version's instructions.
        """
        return self.function(function).version(version)

    def with_function(self, function: Function) -> Program:
        """
        Return a copy with a function replaced by name, or appended if new.

        Args:
            function (Function): Function to store.

        Returns:
            Program: New program.
        """
        if not self.has_function(function.name):
            return Program((*self.functions, function))
        return Program(tuple(function if f.name == function.name else f for f in self.functions))

    def with_stream(self, function: str, version: str, instrs: InstructionStream) -> Program:
        """
        Return a copy with the stream of `function.version` replaced.

        Args:
            function (str): Function name.
            version (str): Version label.
            instrs (InstructionStream): New stream.

        Returns:
            Program: New program.
        """
        return self.with_function(self.function(function).with_version(version, instrs))

    def with_active_version(self, function: str, version: str) -> Program:
        """
        Return a copy where `function.version` is the active version.

        Args:
            function (str): Function name.
            version (str): Version to activate.

        Returns:
            Program: New program.
        """
        return self.with_function(self.function(function).with_active(version))

    def assumes(self) -> Iterator[tuple[Location, Assume]]:
        """
        Iterate over every assume of every version.

        Yields:
            tuple[Location, Assume]: Location and instruction, in program order.
        """
        for function in self.functions:
            for version in function.versions:
                for label, instr in version.instrs:
                    if isinstance(instr, Assume):
                        yield Location(function.name, version.label, label), instr

    def deopt_entries(self) -> dict[Location, list[tuple[Location, frozenset[str]]]]:
        """
        Locations entered by deoptimization, with the scope each incoming piece of metadata installs.

        Targets install the varmap names; extra frames install the varmap names plus the return variable.

        Returns:
            dict[Location, list[tuple[Location, frozenset[str]]]]: Entry location to `(assume location, scope)`.
        """
        entries: dict[Location, list[tuple[Location, frozenset[str]]]] = {}
        for site, assume in self.assumes():
            target = assume.target
            entry = Location(target.function, target.version, target.label)
            entries.setdefault(entry, []).append((site, frozenset(target.varmap.names)))
            for frame in assume.extra_frames:
                entry = Location(frame.function, frame.version, frame.label)
                entries.setdefault(entry, []).append((site, frozenset(frame.varmap.names) | {frame.ret_var}))
        return entries

