"""Label-preserving edits shared by the passes."""

from __future__ import annotations

import dataclasses
from typing import TYPE_CHECKING

from sourir.errors import NotAnAssumeError
from sourir.ir.instructions import Assume, retarget_jumps
from sourir.ir.names import fresh_name

if TYPE_CHECKING:
    from collections.abc import Iterable

    from sourir.ir.instructions import Instruction
    from sourir.ir.program import InstructionStream, Program


def fresh_label(instrs: InstructionStream, base: str) -> str:
    """
    Label not used by a stream, derived from `base`.

    Args:
        instrs (InstructionStream): Stream the label is for.
        base (str): Preferred label.

    Returns:
        str: Fresh label.
    """
    return fresh_name(base, instrs.labels)


def require_assume(program: Program, function: str, version: str, label: str) -> Assume:
    """
    Fetch the assume at `function.version.label`.

    Args:
        program (Program): Program to look in.
        function (str): Function name.
        version (str): Version label.
        label (str): Instruction label.

    Returns:
        Assume: The instruction.

    Raises:
        NotAnAssumeError: If another instruction is there.
    """
    instr = program.stream(function, version).lookup(label)
    if not isinstance(instr, Assume):
        raise NotAnAssumeError(location=f"{function}.{version}.{label}")
    return instr


def retarget_metadata(program: Program, function: str, version: str, old: str, new: str) -> Program:
    """
    Make every deoptimization target and extra frame naming `function.version.old` name `new` instead.

    Args:
        program (Program): Program to rewrite.
        function (str): Function of the renamed label.
        version (str): Version of the renamed label.
        old (str): Label that goes away.
        new (str): Replacement label.

    Returns:
        Program: Rewritten program.
    """

    def fix(instr: Instruction) -> Instruction:
        if not isinstance(instr, Assume):
            return instr
        target = instr.target
        if (target.function, target.version, target.label) == (function, version, old):
            target = dataclasses.replace(target, label=new)
        frames = tuple(
            dataclasses.replace(frame, label=new)
            if (frame.function, frame.version, frame.label) == (function, version, old)
            else frame
            for frame in instr.extra_frames
        )
        return Assume(instr.predicates, target, frames)

    result = program
    for owner in program:
        for each in owner.versions:
            rewritten = each.instrs.map(lambda _, instr: fix(instr))
            if rewritten != each.instrs:
                result = result.with_stream(owner.name, each.label, rewritten)
    return result


def delete_instruction(program: Program, function: str, version: str, label: str) -> Program:
    """
    Delete an instruction, redirecting everything that named its label to the following instruction.

    Jumps of the stream and deoptimization metadata anywhere in the program are redirected.

    Args:
        program (Program): Program to edit.
        function (str): Function name.
        version (str): Version label.
        label (str): Label of the instruction to delete. Must not be the last instruction.

    Returns:
        Program: Edited program.
    """
    instrs = program.stream(function, version)
    successor = instrs.next_label(label)
    index = instrs.index_of(label)
    edited = instrs.splice(index, (), remove=1).map(lambda _, instr: retarget_jumps(instr, label, successor))
    return retarget_metadata(program.with_stream(function, version, edited), function, version, label, successor)


def insert_at(
    program: Program,
    function: str,
    version: str,
    label: str,
    new: Iterable[Instruction],
) -> tuple[Program, tuple[str, ...]]:
    """
    Insert instructions in front of the one at `label`; the first inserted instruction takes over `label`.

    Every jump and fall-through into `label` thus reaches the inserted code first. The inserted instructions after the
    first and the displaced instruction get fresh labels derived from `label`.

    Args:
        program (Program): Program to edit.
        function (str): Function name.
        version (str): Version label.
        label (str): Insertion point.
        new (Iterable[Instruction]): Instructions to insert, in order.

    Returns:
        tuple[Program, tuple[str, ...]]: Edited program and the labels of the inserted instructions followed by the
            new label of the displaced instruction.
    """
    instrs = program.stream(function, version)
    index = instrs.index_of(label)
    displaced = instrs.lookup(label)
    taken = set(instrs.labels)
    labels: list[str] = []
    for position, _ in enumerate([*new, displaced]):
        if position == 0:
            labels.append(label)
            continue
        fresh = fresh_name(label, taken)
        taken.add(fresh)
        labels.append(fresh)
    pairs = list(zip(labels, [*new, displaced], strict=True))
    edited = instrs.splice(index, pairs, remove=1)
    return program.with_stream(function, version, edited), tuple(labels)
