"""Moving assumes forward and snapshotting the variables their metadata needs."""

from __future__ import annotations

from typing import TYPE_CHECKING

from sourir.analysis.scope import deopt_entry_labels, scope_at
from sourir.errors import MoveConditionViolatedError, UnboundVariableError
from sourir.ir.expressions import Var, rename_vars
from sourir.ir.instructions import (
    Assign,
    Drop,
    Goto,
    VarDecl,
    declared_var,
    retarget_jumps,
    used_vars,
    written_var,
)
from sourir.ir.names import fresh_name
from sourir.passes.base import PassReport
from sourir.passes.editing import delete_instruction, insert_at, require_assume, retarget_metadata

if TYPE_CHECKING:
    from sourir.ir.instructions import Assume, Instruction
    from sourir.ir.program import Program


def _check_move(
    program: Program,
    function: str,
    version: str,
    at: str,
    assume: Assume,
) -> tuple[str, Instruction]:
    location = f"{function}.{version}.{at}"
    instrs = program.stream(function, version)
    following = instrs.next_label(at)
    instr = instrs.lookup(following)
    if not isinstance(instr, VarDecl | Assign | Drop | Goto):
        raise MoveConditionViolatedError(condition=1, location=location)
    mentioned = used_vars(assume)
    touched = {declared_var(instr), written_var(instr), instr.name if isinstance(instr, Drop) else None}
    if mentioned & touched:
        raise MoveConditionViolatedError(condition=2, location=location)
    entries = deopt_entry_labels(program, function, version)
    if instrs.predecessors(following) != {at} or following in entries:
        raise MoveConditionViolatedError(condition=3, location=location)
    return following, instr


def move_assume(program: Program, function: str, version: str, at: str) -> tuple[Program, PassReport]:
    """
    Move an assume past the instruction that follows it, keeping its deoptimization target.

    The following instruction must be free of effects (a declaration, assignment, drop or goto), must not write or
    drop anything the assume mentions, and must be reachable only through the assume. Past a goto, the assume moves
    to the goto's target, which must be reachable only through that goto.

    Args:
        program (Program): Program to transform.
        function (str): Function name.
        version (str): Version label.
        at (str): Label of the assume.

    Returns:
        tuple[Program, PassReport]: Transformed program and report.

    Raises:
        NotAnAssumeError: If the instruction at `at` is not an assume.
        MoveConditionViolatedError: If one of the three conditions does not hold, numbered as above.
    """
    assume = require_assume(program, function, version, at)
    following, instr = _check_move(program, function, version, at, assume)
    if isinstance(instr, Goto):
        result = _move_past_goto(program, function, version, at, assume, following)
    else:
        instrs = program.stream(function, version)
        index = instrs.index_of(at)
        swapped = instrs.splice(index, [(following, instr), (at, assume)], remove=2)
        swapped = swapped.map(lambda _, each: retarget_jumps(each, at, following))
        result = retarget_metadata(program.with_stream(function, version, swapped), function, version, at, following)
    return result, PassReport.compare("move-assume", program, result, 2)


def _move_past_goto(program: Program, function: str, version: str, at: str, assume: Assume, goto: str) -> Program:
    instrs = program.stream(function, version)
    jump = instrs.lookup(goto)
    if not isinstance(jump, Goto):
        msg = f"Expected a goto at {function}.{version}.{goto}."
        raise TypeError(msg)
    target = jump.label
    location = f"{function}.{version}.{at}"
    if instrs.predecessors(target) != {goto} or target in deopt_entry_labels(program, function, version):
        raise MoveConditionViolatedError(condition=3, location=location)
    result = delete_instruction(program, function, version, at)
    result, _ = insert_at(result, function, version, target, [assume])
    return result


def snapshot_var(program: Program, function: str, version: str, at: str, name: str) -> tuple[Program, PassReport]:
    """
    Copy a variable right before an assume and make the assume's metadata read the copy.

    Predicates keep reading the variable itself. The copy takes over the label `at`.

    Args:
        program (Program): Program to transform.
        function (str): Function name.
        version (str): Version label.
        at (str): Label of the assume.
        name (str): Variable to snapshot.

    Returns:
        tuple[Program, PassReport]: Transformed program and report.

    Raises:
        NotAnAssumeError: If the instruction at `at` is not an assume.
        UnboundVariableError: If `name` is not in scope at `at`.
    """
    assume = require_assume(program, function, version, at)
    if name not in scope_at(program, function, version).get(at, frozenset()):
        raise UnboundVariableError(location=f"{function}.{version}.{at}", variables=[name])
    instrs = program.stream(function, version)
    taken = {declared_var(instr) for _, instr in instrs} | frozenset().union(*(used_vars(i) for _, i in instrs))
    copy = fresh_name(f"{name}0", {each for each in taken if each is not None})
    rewritten = assume.map_metadata(lambda expr: rename_vars(expr, {name: copy}))
    result, labels = insert_at(program, function, version, at, [VarDecl(copy, Var(name))])
    edited = result.stream(function, version).replace(labels[-1], rewritten)
    result = result.with_stream(function, version, edited)
    return result, PassReport.compare("snapshot-var", program, result, 2, f"snapshot {name} as {copy}")

