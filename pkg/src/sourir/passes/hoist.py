"""
Predicate hoisting.

A predicate is copied to an earlier assume. If the copy is available where the original is checked, the original
is redundant and deleted; otherwise the version is left untouched. Only predicates that cannot fail to evaluate are
copied, since the copy also runs on paths the original never saw.
"""

from __future__ import annotations

import dataclasses
import logging
from typing import TYPE_CHECKING

from sourir.analysis.scope import deopt_entry_labels, scope_at, successors_within
from sourir.errors import OutOfScopeError, PredIndexOutOfRangeError
from sourir.ir.expressions import TRUE, ArrayRead, BoolLit, Length, Op, Primop, free_vars
from sourir.ir.instructions import (
    ArrayStore,
    Assume,
    Call,
    Drop,
    declared_var,
    written_var,
)
from sourir.passes.base import PassReport
from sourir.passes.editing import require_assume
from sourir.passes.versioning import inject_predicate

if TYPE_CHECKING:
    from sourir.ir.expressions import Expr
    from sourir.ir.instructions import Instruction
    from sourir.ir.program import Program

logger = logging.getLogger(__name__)


def _reads_heap(predicate: Expr) -> bool:
    return isinstance(predicate, ArrayRead | Length)


def _never_fails(predicate: Expr) -> bool:
    return isinstance(predicate, BoolLit) or (isinstance(predicate, Primop) and predicate.op in {Op.EQ, Op.NEQ})


def _transfer(available: frozenset[Expr], instr: Instruction) -> frozenset[Expr]:
    changed = {declared_var(instr), written_var(instr), instr.name if isinstance(instr, Drop) else None} - {None}
    heap = isinstance(instr, ArrayStore | Call)
    kept = frozenset(
        predicate
        for predicate in available
        if not (free_vars(predicate) & changed) and not (heap and _reads_heap(predicate))
    )
    if isinstance(instr, Assume):
        kept |= {predicate for predicate in instr.predicates if predicate != TRUE}
    return kept


def available_predicates(program: Program, function: str, version: str) -> dict[str, frozenset[Expr]]:
    """
    Predicates known to hold on entry to every reachable label, because an assume checked them on every path.

    A predicate stops being available when one of its variables is declared, written or dropped, and predicates
    reading the heap also when an array is stored to or a function is called.

    Args:
        program (Program): Program holding the version.
        function (str): Function name.
        version (str): Version label.

    Returns:
        dict[str, frozenset[Expr]]: Available predicates per reachable label.
    """
    instrs = program.stream(function, version)
    if not len(instrs):
        return {}
    roots = {instrs.entry} | (deopt_entry_labels(program, function, version) & set(instrs.labels))
    # None stands for "not reached yet", the top of the lattice.
    entry: dict[str, frozenset[Expr] | None] = dict.fromkeys(instrs.labels)
    for root in roots:
        entry[root] = frozenset()
    changed = True
    while changed:
        changed = False
        for label in instrs.labels:
            current = entry[label]
            if current is None:
                continue
            after = _transfer(current, instrs.lookup(label))
            for successor in successors_within(instrs, label):
                known = entry[successor]
                merged = after if known is None else known & after
                if successor in roots:
                    merged = frozenset()
                if merged != known:
                    entry[successor] = merged
                    changed = True
    return {label: facts for label, facts in entry.items() if facts is not None}


def hoist_predicate(
    program: Program,
    function: str,
    version: str,
    from_label: str,
    to_label: str,
    index: int,
) -> tuple[Program, PassReport]:
    """
    Copy a predicate from the assume at `from_label` to the one at `to_label` and delete the original if redundant.

    Args:
        program (Program): Program to transform.
        function (str): Function name.
        version (str): Version label.
        from_label (str): Assume the predicate is taken from.
        to_label (str): Earlier assume receiving the copy.
        index (int): Position of the predicate in the list at `from_label`.

    Returns:
        tuple[Program, PassReport]: Transformed program and report. If the predicate could fail to evaluate (only
            `==`, `!=` and boolean literals cannot) or the copy is not available at `from_label`, the input program
            is returned unchanged.

    Raises:
        NotAnAssumeError: If one of the labels does not hold an assume.
        PredIndexOutOfRangeError: If `index` does not address a predicate.
        OutOfScopeError: If the predicate mentions variables not in scope at `to_label`.
    """
    source = require_assume(program, function, version, from_label)
    require_assume(program, function, version, to_label)
    if not 0 <= index < len(source.predicates):
        msg = f"Assume at {function}.{version}.{from_label} has {len(source.predicates)} predicates, got {index}."
        raise PredIndexOutOfRangeError(msg)
    predicate = source.predicates[index]
    missing = free_vars(predicate) - scope_at(program, function, version).get(to_label, frozenset())
    if missing:
        raise OutOfScopeError(location=f"{function}.{version}.{to_label}", variables=missing)
    # The copy also runs on paths that never reached `from_label`, so it must evaluate everywhere.
    if not _never_fails(predicate):
        logger.debug("Predicate %r may fail to evaluate at %s; hoisting rolled back", predicate, to_label)
        return program, PassReport("hoist-predicate", changed=False, notes=("rolled back",))

    copied = inject_predicate(program, function, version, to_label, predicate)
    available = available_predicates(copied, function, version).get(from_label, frozenset())
    if predicate not in available:
        logger.debug("Predicate %r is not available at %s; hoisting rolled back", predicate, from_label)
        return program, PassReport("hoist-predicate", changed=False, notes=("rolled back",))
    remaining = source.predicates[:index] + source.predicates[index + 1 :]
    stripped = dataclasses.replace(source, predicates=remaining)
    result = copied.with_stream(function, version, copied.stream(function, version).replace(from_label, stripped))
    return result, PassReport.compare("hoist-predicate", program, result, 2)
