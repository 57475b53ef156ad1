"""Creation and retirement of versions and management of assume instructions."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

from sourir.analysis.scope import scope_at
from sourir.errors import (
    BadDeoptTargetError,
    DuplicateVersionLabelError,
    NotTrivialError,
    UnboundVariableError,
    VersionInUseError,
)
from sourir.ir.expressions import TRUE, free_vars
from sourir.ir.instructions import Assume, DeoptTarget, Varmap
from sourir.passes.base import PassReport
from sourir.passes.editing import delete_instruction, insert_at, require_assume

if TYPE_CHECKING:
    from collections.abc import Iterable

    from sourir.ir.expressions import Expr
    from sourir.ir.instructions import Instruction
    from sourir.ir.program import Program

logger = logging.getLogger(__name__)


def create_version(program: Program, function: str, new_label: str, *, seeds: Iterable[str] = ()) -> Program:
    """
    Copy the active version of a function into a new active version.

    Every assume of the copy deoptimizes to the same label of the version it was copied from, with the identity
    varmap over the scope there. Chained versions thus deoptimize one step at a time.

    Args:
        program (Program): Program to transform.
        function (str): Function name.
        new_label (str): Label of the new version.
        seeds (Iterable[str]): Labels of the copy at which a fresh `assume true` is inserted. Default is none.

    Returns:
        Program: Program whose function `function` has `new_label` as active version.

    Raises:
        DuplicateVersionLabelError: If `new_label` is already a version of the function.
    """
    owner = program.function(function)
    if owner.has_version(new_label):
        raise DuplicateVersionLabelError(function=function, version=new_label)
    source = owner.active.label
    scopes = scope_at(program, function, source)

    def retarget(label: str, instr: Instruction) -> Instruction:
        if not isinstance(instr, Assume) or label not in scopes:
            return instr
        return Assume(instr.predicates, DeoptTarget(function, source, label, Varmap.identity(scopes[label])))

    copy = owner.active.instrs.map(retarget)
    result = program.with_function(owner.with_new_active(new_label, copy))
    logger.debug("Created %s.%s from %s.%s", function, new_label, function, source)
    for seed in seeds:
        result = insert_assume(result, function, new_label, seed)
    return result


def insert_assume(
    program: Program,
    function: str,
    version: str,
    at: str,
    *,
    target_version: str | None = None,
) -> Program:
    """
    Insert `assume true else F.Vprev.at [identity]` so that it guards every entry to `at`.

    The new assume takes over the label `at`; the instruction that was there moves to a fresh label right after it.

    Args:
        program (Program): Program to transform.
        function (str): Function name.
        version (str): Version to insert into.
        at (str): Label to guard.
        target_version (str | None): Version to deoptimize to. Default is the version listed after `version`.

    Returns:
        Program: Transformed program.

    Raises:
        BadDeoptTargetError: If there is no target version or `at` does not exist in it.
        UnboundVariableError: If the target scope at `at` is not declared at `at` in `version`.
    """
    owner = program.function(function)
    if target_version is None:
        target_version = owner.version_after(version)
    if target_version is None or not owner.has_version(target_version):
        msg = f"{function}.{version} has no version to deoptimize to."
        raise BadDeoptTargetError(msg)
    if at not in owner.version(target_version):
        msg = f"Label {at!r} does not exist in {function}.{target_version}."
        raise BadDeoptTargetError(msg)
    target_scope = scope_at(program, function, target_version).get(at)
    if target_scope is None:
        msg = f"Label {at!r} of {function}.{target_version} is unreachable."
        raise BadDeoptTargetError(msg)
    missing = target_scope - scope_at(program, function, version).get(at, frozenset())
    if missing:
        raise UnboundVariableError(location=f"{function}.{version}.{at}", variables=missing)
    guard = Assume((TRUE,), DeoptTarget(function, target_version, at, Varmap.identity(target_scope)))
    result, _ = insert_at(program, function, version, at, [guard])
    return result


def inject_predicate(program: Program, function: str, version: str, at: str, predicate: Expr) -> Program:
    """
    Append a predicate to an existing assume.

    Literal `true` placeholders are dropped from the list, so injecting into `assume true` yields `assume e`.

    Args:
        program (Program): Program to transform.
        function (str): Function name.
        version (str): Version label.
        at (str): Label of the assume.
        predicate (Expr): Predicate to add.

    Returns:
        Program: Transformed program.

    Raises:
        NotAnAssumeError: If the instruction at `at` is not an assume.
        UnboundVariableError: If the predicate mentions variables not in scope at `at`.
    """
    assume = require_assume(program, function, version, at)
    missing = free_vars(predicate) - scope_at(program, function, version).get(at, frozenset())
    if missing:
        raise UnboundVariableError(location=f"{function}.{version}.{at}", variables=missing)
    kept = tuple(p for p in assume.predicates if p != TRUE)
    predicates = (*kept, predicate) if predicate != TRUE or not kept else kept
    edited = program.stream(function, version).replace(at, Assume(predicates, assume.target, assume.extra_frames))
    return program.with_stream(function, version, edited)


def remove_trivial_assume(program: Program, function: str, version: str, at: str) -> tuple[Program, PassReport]:
    """
    Delete an assume that can never fail.

    Args:
        program (Program): Program to transform.
        function (str): Function name.
        version (str): Version label.
        at (str): Label of the assume.

    Returns:
        tuple[Program, PassReport]: Transformed program and report.

    Raises:
        NotAnAssumeError: If the instruction at `at` is not an assume.
        NotTrivialError: If the assume has a predicate other than `true`.
    """
    assume = require_assume(program, function, version, at)
    if not assume.is_trivial:
        raise NotTrivialError(location=f"{function}.{version}.{at}")
    result = delete_instruction(program, function, version, at)
    return result, PassReport.compare("remove-trivial-assume", program, result, 1)


def discard_version(program: Program, function: str, version: str) -> tuple[Program, PassReport]:
    """
    Remove a version nothing deoptimizes to any more.

    If the version was active, the next version becomes active.

    Args:
        program (Program): Program to transform.
        function (str): Function name.
        version (str): Version to remove.

    Returns:
        tuple[Program, PassReport]: Transformed program and report.

    Raises:
        VersionInUseError: If it is the only version or some metadata outside of it still names it.
    """
    owner = program.function(function)
    owner.version(version)
    if len(owner.versions) == 1:
        msg = f"{function}.{version} is the only version of {function!r}."
        raise VersionInUseError(msg)
    for site, assume in program.assumes():
        if (site.function, site.version) == (function, version):
            continue
        named = [(assume.target.function, assume.target.version)]
        named += [(frame.function, frame.version) for frame in assume.extra_frames]
        if (function, version) in named:
            msg = f"{function}.{version} is still a deoptimization target of {site}."
            raise VersionInUseError(msg)
    result = program.with_function(owner.without_version(version))
    logger.debug("Discarded %s.%s", function, version)
    return result, PassReport.compare("discard-version", program, result, len(owner.version(version)))
