"""
Inlining of direct calls.

Assumes inherited from the inlinee keep deoptimizing into the inlinee's versions. Each of them gets an extra frame
returning into the caller version the optimized caller was copied from, so deoptimizing from inlined code rebuilds
the caller's frame as if it had performed the call itself.
"""

from __future__ import annotations

import dataclasses
import logging
from typing import TYPE_CHECKING

from sourir.analysis.scope import scope_at
from sourir.errors import (
    BadDeoptTargetError,
    CallArityMismatchError,
    NotACallError,
    NotADirectCallError,
)
from sourir.ir.expressions import NIL, FunRef, rename_vars
from sourir.ir.instructions import (
    Assign,
    Assume,
    Branch,
    Call,
    Drop,
    ExtraFrame,
    Goto,
    Return,
    VarDecl,
    Varmap,
    declared_var,
    map_expressions,
    rename_declared,
    used_vars,
)
from sourir.ir.names import NameSupply
from sourir.passes.base import PassReport

if TYPE_CHECKING:
    from sourir.ir.instructions import Instruction
    from sourir.ir.program import InstructionStream, Program

logger = logging.getLogger(__name__)


def _variables(params: tuple[str, ...], instrs: InstructionStream) -> list[str]:
    names = dict.fromkeys(params)
    for _, instr in instrs:
        declared = declared_var(instr)
        if declared is not None:
            names.setdefault(declared)
        for name in sorted(used_vars(instr)):
            names.setdefault(name)
    return list(names)


def inline(
    program: Program,
    function: str,
    version: str,
    at: str,
    *,
    frame_version: str | None = None,
) -> tuple[Program, PassReport]:
    """
    Replace the direct call at `function.version.at` by the body of the callee's active version.

    The call's result variable is declared as `nil` at the call label, each argument is bound to a renamed parameter,
    and every `return e` becomes an assignment of the result, drops of the inlinee's variables and a jump back.

    Args:
        program (Program): Program to transform.
        function (str): Caller function.
        version (str): Caller version.
        at (str): Label of the call.
        frame_version (str | None): Caller version the extra frames return into. Default is the version listed after
            `version`.

    Returns:
        tuple[Program, PassReport]: Transformed program and report.

    Raises:
        NotACallError: If the instruction at `at` is not a call.
        NotADirectCallError: If the callee is not a function reference.
        CallArityMismatchError: If the argument count differs from the callee's parameter count.
        BadDeoptTargetError: If the inlinee has assumes and there is no valid caller version to return into.
    """
    location = f"{function}.{version}.{at}"
    caller = program.stream(function, version)
    call = caller.lookup(at)
    if not isinstance(call, Call):
        raise NotACallError(location=location)
    if not isinstance(call.callee, FunRef):
        raise NotADirectCallError(location=location)
    callee = program.function(call.callee.name)
    if len(callee.params) != len(call.args):
        msg = f"{location} passes {len(call.args)} arguments to {callee.name!r}, which takes {len(callee.params)}."
        raise CallArityMismatchError(msg)
    body = callee.active.instrs
    return_label = caller.next_label(at)
    result_var = call.name

    variables = NameSupply(_caller_names(caller))
    renaming = {name: variables.fresh(name) for name in _variables(callee.params, body)}
    labels = NameSupply(caller.labels)
    relabel = {label: labels.fresh(label) for label in body.labels}

    frame = None
    if any(isinstance(instr, Assume) for _, instr in body):
        frame = _caller_frame(program, function, version, return_label, result_var, frame_version)

    callee_scopes = scope_at(program, callee.name, callee.active.label)
    inlined: list[tuple[str, Instruction]] = [(at, VarDecl(result_var, NIL))]
    inlined += [
        (labels.fresh(at), VarDecl(renaming[param], arg)) for param, arg in zip(callee.params, call.args, strict=True)
    ]
    for label, instr in body:
        new_label = relabel[label]
        renamed = _rename(instr, renaming, relabel)
        if isinstance(renamed, Return):
            scope = sorted(renaming[name] for name in callee_scopes.get(label, frozenset()))
            inlined.append((new_label, Assign(result_var, renamed.expr)))
            inlined += [(labels.fresh(new_label), Drop(name)) for name in scope]
            inlined.append((labels.fresh(new_label), Goto(return_label)))
            continue
        if isinstance(renamed, Assume) and frame is not None:
            renamed = dataclasses.replace(renamed, extra_frames=(*renamed.extra_frames, frame))
        inlined.append((new_label, renamed))

    edited = caller.splice(caller.index_of(at), inlined, remove=1)
    result = program.with_stream(function, version, edited)
    logger.debug("Inlined %s into %s (%d instructions)", callee.name, location, len(inlined))
    return result, PassReport.compare("inline", program, result, len(inlined), f"inlined {callee.name}")


def _caller_names(caller: InstructionStream) -> set[str]:
    names: set[str] = set()
    for _, instr in caller:
        declared = declared_var(instr)
        if declared is not None:
            names.add(declared)
        names |= used_vars(instr)
    return names


def _caller_frame(
    program: Program,
    function: str,
    version: str,
    return_label: str,
    result_var: str,
    frame_version: str | None,
) -> ExtraFrame:
    owner = program.function(function)
    if frame_version is None:
        frame_version = owner.version_after(version)
    if frame_version is None or not owner.has_version(frame_version):
        msg = f"{function}.{version} has no version for inlined assumes to return into."
        raise BadDeoptTargetError(msg)
    scope = scope_at(program, function, frame_version).get(return_label)
    if scope is None:
        msg = f"Label {return_label!r} is not reachable in {function}.{frame_version}."
        raise BadDeoptTargetError(msg)
    return ExtraFrame(function, frame_version, return_label, result_var, Varmap.identity(scope - {result_var}))


def _rename(instr: Instruction, renaming: dict[str, str], relabel: dict[str, str]) -> Instruction:
    renamed = rename_declared(map_expressions(instr, lambda expr: rename_vars(expr, renaming)), renaming)
    match renamed:
        case Goto(label):
            return Goto(relabel[label])
        case Branch(cond, then_label, else_label):
            return Branch(cond, relabel[then_label], relabel[else_label])
        case _:
            return renamed

