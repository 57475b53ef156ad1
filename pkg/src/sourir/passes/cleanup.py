"""Branch folding, unreachable code elimination and dead variable elimination."""

from __future__ import annotations

import logging
from collections import deque
from typing import TYPE_CHECKING

from sourir.analysis.scope import deopt_entry_labels, scope_at, successors_within
from sourir.errors import ScopeMismatchError
from sourir.ir.expressions import FALSE, TRUE, Op, Primop, is_simple
from sourir.ir.instructions import Branch, Drop, Goto, VarDecl, declared_var, used_vars
from sourir.ir.program import InstructionStream
from sourir.passes.base import PassReport
from sourir.passes.editing import delete_instruction

if TYPE_CHECKING:
    from sourir.ir.expressions import Expr
    from sourir.ir.instructions import Instruction
    from sourir.ir.program import Program

logger = logging.getLogger(__name__)


def fold_branches(program: Program, function: str, version: str) -> tuple[Program, PassReport]:
    """
    Turn branches on the literals `true` and `false` into gotos.

    Args:
        program (Program): Program to transform.
        function (str): Function name.
        version (str): Version label.

    Returns:
        tuple[Program, PassReport]: Transformed program and report.
    """
    rewrites = 0

    def fold(_: str, instr: Instruction) -> Instruction:
        nonlocal rewrites
        match instr:
            case Branch(cond, then_label, _) if cond == TRUE:
                rewrites += 1
                return Goto(then_label)
            case Branch(cond, _, else_label) if cond == FALSE:
                rewrites += 1
                return Goto(else_label)
            case _:
                return instr

    edited = program.stream(function, version).map(fold)
    result = program.with_stream(function, version, edited)
    return result, PassReport.compare("fold-branches", program, result, rewrites)


def reachable_labels(program: Program, function: str, version: str) -> frozenset[str]:
    """
    Labels reachable from the entry or from a label that deoptimization enters.

    Args:
        program (Program): Program holding the version.
        function (str): Function name.
        version (str): Version label.

    Returns:
        frozenset[str]: Reachable labels.
    """
    instrs = program.stream(function, version)
    if not len(instrs):
        return frozenset()
    roots = {instrs.entry} | (deopt_entry_labels(program, function, version) & set(instrs.labels))
    seen = set(roots)
    worklist = deque(roots)
    while worklist:
        for successor in successors_within(instrs, worklist.popleft()):
            if successor not in seen:
                seen.add(successor)
                worklist.append(successor)
    return frozenset(seen)


def remove_unreachable(program: Program, function: str, version: str) -> tuple[Program, PassReport]:
    """
    Delete unreachable instructions and gotos that jump to the next instruction.

    Args:
        program (Program): Program to transform.
        function (str): Function name.
        version (str): Version label.

    Returns:
        tuple[Program, PassReport]: Transformed program and report.
    """
    instrs = program.stream(function, version)
    reachable = reachable_labels(program, function, version)
    kept = InstructionStream.of((label, instr) for label, instr in instrs if label in reachable)
    rewrites = len(instrs) - len(kept)
    result = program.with_stream(function, version, kept)
    while (label := _redundant_goto(result.stream(function, version))) is not None:
        result = delete_instruction(result, function, version, label)
        rewrites += 1
    logger.debug("Removed %d instructions from %s.%s", rewrites, function, version)
    return result, PassReport.compare("remove-unreachable", program, result, rewrites)


def _redundant_goto(instrs: InstructionStream) -> str | None:
    labels = instrs.labels
    for index, (label, instr) in enumerate(instrs):
        if isinstance(instr, Goto) and index + 1 < len(labels) and labels[index + 1] == instr.label:
            return label
    return None


def is_effect_free(expr: Expr) -> bool:
    """
    Check whether evaluating an expression in a well-formed program can never fail.

    Args:
        expr (Expr): Expression to check.

    Returns:
        bool: True for simple expressions and structural (in)equality.
    """
    return is_simple(expr) or (isinstance(expr, Primop) and expr.op in {Op.EQ, Op.NEQ})


def _reads(instr: Instruction) -> frozenset[str]:
    names = used_vars(instr)
    return names - {instr.name} if isinstance(instr, Drop) else names


def live_after(instrs: InstructionStream) -> dict[str, frozenset[str]]:
    """
    Variables that may still be needed after each instruction, deoptimization metadata included.

    Drops do not count as uses.

    Args:
        instrs (InstructionStream): Stream to analyze.

    Returns:
        dict[str, frozenset[str]]: Live variables after every label.
    """
    live_in: dict[str, frozenset[str]] = dict.fromkeys(instrs.labels, frozenset())
    live_out: dict[str, frozenset[str]] = dict.fromkeys(instrs.labels, frozenset())
    changed = True
    while changed:
        changed = False
        for label in reversed(instrs.labels):
            instr = instrs.lookup(label)
            out = frozenset().union(*(live_in[successor] for successor in successors_within(instrs, label)))
            declared = declared_var(instr)
            new_in = _reads(instr) | (out - {declared} if declared else out)
            if out != live_out[label] or new_in != live_in[label]:
                live_out[label], live_in[label] = out, new_in
                changed = True
    return live_out


def _matching_drops(instrs: InstructionStream, label: str, name: str) -> list[str]:
    drops: list[str] = []
    seen: set[str] = set()
    worklist = deque(successors_within(instrs, label))
    while worklist:
        current = worklist.popleft()
        if current in seen:
            continue
        seen.add(current)
        instr = instrs.lookup(current)
        if isinstance(instr, Drop) and instr.name == name:
            drops.append(current)
            continue
        if declared_var(instr) == name:
            continue
        worklist.extend(successors_within(instrs, current))
    return drops


def _protected_names(program: Program, function: str, version: str) -> frozenset[str]:
    scopes = scope_at(program, function, version)
    entries = deopt_entry_labels(program, function, version)
    return frozenset().union(*(scopes[label] for label in entries if label in scopes))


def remove_dead_vars(program: Program, function: str, version: str) -> tuple[Program, PassReport]:
    """
    Delete effect-free declarations of variables that are never used afterwards, together with their drops.

    Uses inside assume predicates and deoptimization metadata count. Variables in scope where deoptimization enters
    the version are kept. Removal is repeated until nothing changes.

    Args:
        program (Program): Program to transform.
        function (str): Function name.
        version (str): Version label.

    Returns:
        tuple[Program, PassReport]: Transformed program and report.
    """
    result = program
    rewrites = 0
    rejected: set[tuple[str, str]] = set()
    protected = _protected_names(program, function, version)
    while True:
        instrs = result.stream(function, version)
        live = live_after(instrs)
        candidate = next(
            (
                (label, instr.name)
                for label, instr in instrs
                if isinstance(instr, VarDecl)
                and is_effect_free(instr.expr)
                and instr.name not in live[label]
                and instr.name not in protected
                and (label, instr.name) not in rejected
            ),
            None,
        )
        if candidate is None:
            break
        label, name = candidate
        attempt = result
        removed = [*_matching_drops(instrs, label, name), label]
        for each in removed:
            attempt = delete_instruction(attempt, function, version, each)
        try:
            scope_at(attempt, function, version)
        except ScopeMismatchError:
            logger.debug("Keeping %s at %s.%s.%s: other paths still declare it", name, function, version, label)
            rejected.add(candidate)
            continue
        result = attempt
        rewrites += len(removed)
    return result, PassReport.compare("remove-dead-vars", program, result, rewrites)
