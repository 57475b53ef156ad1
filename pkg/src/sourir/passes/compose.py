"""Assume composition: one deoptimization instead of two chained ones."""

from __future__ import annotations

import dataclasses
from typing import TYPE_CHECKING

from sourir.errors import (
    BadDeoptTargetError,
    CompositionNestingError,
    TargetNotAssumeError,
    UnknownFunctionError,
    UnknownLabelError,
    UnknownVersionError,
)
from sourir.ir.expressions import TRUE, substitute
from sourir.ir.instructions import Assume, DeoptTarget
from sourir.passes.base import PassReport
from sourir.passes.editing import require_assume

if TYPE_CHECKING:
    from sourir.ir.expressions import Expr
    from sourir.ir.program import Program


def compose_assume(program: Program, function: str, version: str, at: str) -> tuple[Program, PassReport]:
    """
    Make the assume at `at` deoptimize directly to where the assume at its target would send it.

    Inner predicates, the inner varmap and the inner extra frames are rewritten by substituting the outer varmap.
    Inner frames come first since, after two deoptimizations, they sit on top of the outer assume's frames.

    Args:
        program (Program): Program to transform.
        function (str): Function name.
        version (str): Version label.
        at (str): Label of the outer assume.

    Returns:
        tuple[Program, PassReport]: Transformed program and report.

    Raises:
        NotAnAssumeError: If the instruction at `at` is not an assume.
        BadDeoptTargetError: If the target location does not exist.
        TargetNotAssumeError: If the target instruction is not an assume.
        CompositionNestingError: If substitution would nest an expression inside an operation.
    """
    outer = require_assume(program, function, version, at)
    target = outer.target
    try:
        inner = program.stream(target.function, target.version).lookup(target.label)
    except (UnknownFunctionError, UnknownVersionError, UnknownLabelError) as e:
        msg = f"Target {target.location} of {function}.{version}.{at} does not exist."
        raise BadDeoptTargetError(msg) from e
    if not isinstance(inner, Assume):
        msg = f"Target {target.location} of {function}.{version}.{at} is not an assume."
        raise TargetNotAssumeError(msg)
    bindings = target.varmap.as_dict()

    def through_outer(expr: Expr) -> Expr:
        result = substitute(expr, bindings)
        if result is None:
            msg = f"Composing {function}.{version}.{at} with {target.location} nests an expression."
            raise CompositionNestingError(msg)
        return result

    predicates = (*outer.predicates, *(through_outer(p) for p in inner.predicates))
    if any(p != TRUE for p in predicates):
        predicates = tuple(p for p in predicates if p != TRUE)
    new_target = DeoptTarget(
        inner.target.function,
        inner.target.version,
        inner.target.label,
        inner.target.varmap.map_exprs(through_outer),
    )
    frames = tuple(
        dataclasses.replace(frame, varmap=frame.varmap.map_exprs(through_outer)) for frame in inner.extra_frames
    )
    composed = Assume(predicates, new_target, (*frames, *outer.extra_frames))
    result = program.with_stream(function, version, program.stream(function, version).replace(at, composed))
    return result, PassReport.compare("compose-assume", program, result, 1, f"now targets {new_target.location}")
