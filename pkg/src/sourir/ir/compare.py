from __future__ import annotations

from typing import TYPE_CHECKING

from sourir.ir.expressions import rename_vars
from sourir.ir.instructions import (
    Branch,
    Goto,
    declared_var,
    map_expressions,
    rename_declared,
    used_vars,
)

if TYPE_CHECKING:
    from sourir.ir.instructions import Instruction
    from sourir.ir.program import InstructionStream


def same_modulo_labels(left: InstructionStream, right: InstructionStream) -> bool:
    """
    Compare two streams instruction by instruction, treating their own labels and declared names as interchangeable.

    Labels are matched by position; jumps must agree under that matching. Variables declared at the same position
    are matched too, and every use must agree under that matching. Parameters and the varmap names of
    deoptimization targets belong to the function or to other versions and are compared literally.

    Args:
        left (InstructionStream): First stream.
        right (InstructionStream): Second stream.

    Returns:
        bool: True if the streams differ only in the choice of labels and declared variable names.
    """
    if len(left) != len(right):
        return False
    matching = dict(zip(left.labels, right.labels, strict=True))
    renaming = _declared_renaming(left, right)
    if renaming is None:
        return False
    return all(
        _rename(_relabel(instr, matching), renaming) == other
        for (_, instr), (_, other) in zip(left, right, strict=True)
    )


def _names(instr: Instruction) -> set[str]:
    declared = declared_var(instr)
    return set(used_vars(instr)) | ({declared} if declared else set())


def _declared_renaming(left: InstructionStream, right: InstructionStream) -> dict[str, str] | None:
    renaming: dict[str, str] = {}
    for (_, instr), (_, other) in zip(left, right, strict=True):
        name, counterpart = declared_var(instr), declared_var(other)
        if name is None or counterpart is None:
            continue
        if renaming.setdefault(name, counterpart) != counterpart:
            return None
    # Distinct names must stay distinct, including names left as they are.
    kept = set().union(*(_names(instr) for _, instr in left)) - renaming.keys()
    images = list(renaming.values())
    if len(set(images)) != len(images) or kept & set(images):
        return None
    return renaming


def _rename(instr: Instruction, renaming: dict[str, str]) -> Instruction:
    return rename_declared(map_expressions(instr, lambda expr: rename_vars(expr, renaming)), renaming)


def _relabel(instr: Instruction, matching: dict[str, str]) -> Instruction:
    match instr:
        case Goto(label):
            return Goto(matching.get(label, label))
        case Branch(cond, then_label, else_label):
            return Branch(cond, matching.get(then_label, then_label), matching.get(else_label, else_label))
        case _:
            return instr
