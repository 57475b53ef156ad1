"""
Pipelines: sequences of pass invocations checked after every stage.

Pipeline text holds one invocation per line, `pass-name arg=value ...`; values follow shell quoting rules and `#`
starts a comment. Example: `inject-predicate fn=size version=V2 at=L2 pred="x != nil"`.
"""

from __future__ import annotations

import dataclasses
import logging
import shlex
from typing import TYPE_CHECKING

from sourir.analysis.checker import check_program
from sourir.errors import InvalidPassArgumentsError, ParseError, PipelineAbortedError, SourirError
from sourir.passes.base import PassBase, PassRegistry, PassReport
from sourir.passes.cleanup import fold_branches, remove_dead_vars, remove_unreachable
from sourir.passes.compose import compose_assume
from sourir.passes.constprop import constant_propagate
from sourir.passes.hoist import hoist_predicate
from sourir.passes.inline import inline
from sourir.passes.motion import move_assume, snapshot_var
from sourir.passes.versioning import (
    create_version,
    discard_version,
    insert_assume,
    inject_predicate,
    remove_trivial_assume,
)
from sourir.text.parser import parse_expression

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping, Sequence

    from sourir.ir.expressions import Expr
    from sourir.ir.program import Program

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, slots=True)
class PassInvocation:
    """One pipeline stage: a pass name and its `arg=value` arguments."""

    name: str
    arguments: tuple[tuple[str, str], ...] = ()

    @classmethod
    def of(cls, name: str, **arguments: str) -> PassInvocation:
        """
        Build an invocation from keyword arguments. Underscores in keywords become dashes.

        Args:
            name (str): Pass name.
            **arguments (str): Arguments.

        Returns:
            PassInvocation: Invocation.
        """
        return cls(name, tuple((key.replace("_", "-"), value) for key, value in arguments.items()))

    @property
    def argument_map(self) -> dict[str, str]:
        """
        Arguments as a dictionary.

        Returns:
            dict[str, str]: Argument name to value.
        """
        return dict(self.arguments)

    def render(self) -> str:
        """
        Render the invocation as one pipeline line.

        Returns:
            str: Pipeline line.
        """
        return " ".join([self.name, *(f"{key}={shlex.quote(value)}" for key, value in self.arguments)])


def parse_pipeline(text: str) -> list[PassInvocation]:
    """
    Parse pipeline text.

    Args:
        text (str): Pipeline source.

    Returns:
        list[PassInvocation]: Invocations in order.

    Raises:
        ParseError: If a line is not `pass-name arg=value ...`.
    """
    invocations: list[PassInvocation] = []
    for number, line in enumerate(text.splitlines(), start=1):
        try:
            words = shlex.split(line, comments=True)
        except ValueError as e:
            raise ParseError(line=number, column=1, reason=str(e)) from e
        if not words:
            continue
        name, *rest = words
        arguments: list[tuple[str, str]] = []
        for word in rest:
            key, sep, value = word.partition("=")
            if not sep or not key:
                raise ParseError(line=number, column=line.find(word) + 1, reason=f"expected arg=value, got {word!r}")
            arguments.append((key, value))
        invocations.append(PassInvocation(name, tuple(arguments)))
    return invocations


def render_pipeline(invocations: Iterable[PassInvocation]) -> str:
    """
    Render invocations as pipeline text.

    Args:
        invocations (Iterable[PassInvocation]): Stages.

    Returns:
        str: Pipeline text, one line per stage.
    """
    return "".join(f"{invocation.render()}\n" for invocation in invocations)


class _VersionPass(PassBase):
    """Pass working on one version of a function: `fn` plus optional `version`, the active one by default."""

    _REQUIRED = ("fn",)
    _OPTIONAL = ("version",)

    @staticmethod
    def _version(program: Program, arguments: Mapping[str, str]) -> str:
        return arguments.get("version") or program.function(arguments["fn"]).active.label


class _LabelPass(_VersionPass):
    _REQUIRED = ("fn", "at")


class CreateVersionPass(PassBase):
    name = "create-version"
    _REQUIRED = ("fn", "version")
    _OPTIONAL = ("seeds",)

    def _apply(self, program: Program, arguments: Mapping[str, str]) -> tuple[Program, PassReport]:
        seeds = [seed for seed in arguments.get("seeds", "").split(",") if seed]
        result = create_version(program, arguments["fn"], arguments["version"], seeds=seeds)
        copied = len(result.stream(arguments["fn"], arguments["version"]))
        return result, PassReport.compare(self.name, program, result, copied)


class InsertAssumePass(_LabelPass):
    name = "insert-assume"
    _OPTIONAL = ("version", "target-version")

    def _apply(self, program: Program, arguments: Mapping[str, str]) -> tuple[Program, PassReport]:
        version = self._version(program, arguments)
        target = arguments.get("target-version")
        result = insert_assume(program, arguments["fn"], version, arguments["at"], target_version=target)
        return result, PassReport.compare(self.name, program, result, 1)


class InjectPredicatePass(_LabelPass):
    name = "inject-predicate"
    _REQUIRED = ("fn", "at", "pred")

    def _apply(self, program: Program, arguments: Mapping[str, str]) -> tuple[Program, PassReport]:
        predicate = _expression(self.name, arguments["pred"])
        version = self._version(program, arguments)
        result = inject_predicate(program, arguments["fn"], version, arguments["at"], predicate)
        return result, PassReport.compare(self.name, program, result, 1)


class ConstantPropagatePass(_VersionPass):
    name = "constant-propagate"

    def _apply(self, program: Program, arguments: Mapping[str, str]) -> tuple[Program, PassReport]:
        return constant_propagate(program, arguments["fn"], self._version(program, arguments))


class FoldBranchesPass(_VersionPass):
    name = "fold-branches"

    def _apply(self, program: Program, arguments: Mapping[str, str]) -> tuple[Program, PassReport]:
        return fold_branches(program, arguments["fn"], self._version(program, arguments))


class RemoveUnreachablePass(_VersionPass):
    name = "remove-unreachable"

    def _apply(self, program: Program, arguments: Mapping[str, str]) -> tuple[Program, PassReport]:
        return remove_unreachable(program, arguments["fn"], self._version(program, arguments))


class RemoveDeadVarsPass(_VersionPass):
    name = "remove-dead-vars"

    def _apply(self, program: Program, arguments: Mapping[str, str]) -> tuple[Program, PassReport]:
        return remove_dead_vars(program, arguments["fn"], self._version(program, arguments))


class InlinePass(_LabelPass):
    name = "inline"
    _OPTIONAL = ("version", "frame-version")

    def _apply(self, program: Program, arguments: Mapping[str, str]) -> tuple[Program, PassReport]:
        version = self._version(program, arguments)
        frame_version = arguments.get("frame-version")
        return inline(program, arguments["fn"], version, arguments["at"], frame_version=frame_version)


class MoveAssumePass(_LabelPass):
    name = "move-assume"

    def _apply(self, program: Program, arguments: Mapping[str, str]) -> tuple[Program, PassReport]:
        return move_assume(program, arguments["fn"], self._version(program, arguments), arguments["at"])


class SnapshotVarPass(_LabelPass):
    name = "snapshot-var"
    _REQUIRED = ("fn", "at", "var")

    def _apply(self, program: Program, arguments: Mapping[str, str]) -> tuple[Program, PassReport]:
        version = self._version(program, arguments)
        return snapshot_var(program, arguments["fn"], version, arguments["at"], arguments["var"])


class HoistPredicatePass(_VersionPass):
    name = "hoist-predicate"
    _REQUIRED = ("fn", "from", "to")
    _OPTIONAL = ("version", "index")

    def _apply(self, program: Program, arguments: Mapping[str, str]) -> tuple[Program, PassReport]:
        try:
            index = int(arguments.get("index", "0"))
        except ValueError as e:
            raise InvalidPassArgumentsError(pass_name=self.name, reason=f"index {arguments['index']!r}") from e
        version = self._version(program, arguments)
        return hoist_predicate(program, arguments["fn"], version, arguments["from"], arguments["to"], index)


class RemoveTrivialAssumePass(_LabelPass):
    name = "remove-trivial-assume"

    def _apply(self, program: Program, arguments: Mapping[str, str]) -> tuple[Program, PassReport]:
        return remove_trivial_assume(program, arguments["fn"], self._version(program, arguments), arguments["at"])


class ComposeAssumePass(_LabelPass):
    name = "compose-assume"

    def _apply(self, program: Program, arguments: Mapping[str, str]) -> tuple[Program, PassReport]:
        return compose_assume(program, arguments["fn"], self._version(program, arguments), arguments["at"])


class DiscardVersionPass(PassBase):
    name = "discard-version"
    _REQUIRED = ("fn", "version")

    def _apply(self, program: Program, arguments: Mapping[str, str]) -> tuple[Program, PassReport]:
        return discard_version(program, arguments["fn"], arguments["version"])


def _expression(pass_name: str, text: str) -> Expr:
    try:
        return parse_expression(text)
    except ParseError as e:
        raise InvalidPassArgumentsError(pass_name=pass_name, reason=f"cannot parse {text!r}: {e}") from e


PASSES: tuple[type[PassBase], ...] = (
    CreateVersionPass,
    InsertAssumePass,
    InjectPredicatePass,
    ConstantPropagatePass,
    FoldBranchesPass,
    RemoveUnreachablePass,
    RemoveDeadVarsPass,
    InlinePass,
    MoveAssumePass,
    SnapshotVarPass,
    HoistPredicatePass,
    RemoveTrivialAssumePass,
    ComposeAssumePass,
    DiscardVersionPass,
)


def default_registry() -> PassRegistry:
    """
    Registry holding every built-in pass under its pipeline name.

    Returns:
        PassRegistry: Fresh registry; callers may register more passes on it.
    """
    registry = PassRegistry()
    for pass_class in PASSES:
        registry.register(pass_class.name, pass_class())
    return registry


def run_pipeline(
    program: Program,
    invocations: Sequence[PassInvocation],
    *,
    registry: PassRegistry | None = None,
) -> tuple[Program, list[PassReport]]:
    """
    Apply pass invocations in order, checking the program after every stage.

    Args:
        program (Program): Input program.
        invocations (Sequence[PassInvocation]): Stages.
        registry (PassRegistry | None): Passes to look names up in. Default is `default_registry()`.

    Returns:
        tuple[Program, list[PassReport]]: Final program and one report per stage.

    Raises:
        PipelineAbortedError: If a stage fails or leaves an ill-formed program. Stages are numbered from 1.
    """
    registry = registry if registry is not None else default_registry()
    reports: list[PassReport] = []
    for stage, invocation in enumerate(invocations, start=1):
        try:
            pass_ = registry[invocation.name]
            program, report = pass_(program, invocation.argument_map)
        except SourirError as e:
            logger.info("Stage %d (%s) failed: %s", stage, invocation.name, e)
            raise PipelineAbortedError(stage=stage, pass_name=invocation.name, reason=str(e)) from e
        diagnostics = check_program(program)
        if diagnostics:
            logger.info("Stage %d (%s) produced an ill-formed program", stage, invocation.name)
            raise PipelineAbortedError(stage=stage, pass_name=invocation.name, diagnostics=diagnostics)
        logger.debug("Stage %d: %s", stage, report.render())
        reports.append(report)
    return program, reports
