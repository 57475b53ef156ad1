"""Driver programs that call a function with arguments taken from the input script."""

from __future__ import annotations

from typing import TYPE_CHECKING

from sourir.ir.expressions import NIL, FunRef, Var
from sourir.ir.instructions import Call, Print, Read, Stop, VarDecl
from sourir.ir.names import NameSupply
from sourir.ir.program import MAIN, Function, InstructionStream, Program, Version

if TYPE_CHECKING:
    from sourir.ir.instructions import Instruction


def driver_harness(program: Program, function: str, *, version: str = "Vh") -> Program:
    """
    Build a program whose `main` reads one literal per parameter of `function`, calls it and prints the result.

    Args:
        program (Program): Program defining the function.
        function (str): Function to drive.
        version (str): Version label of the harness `main`. Default is `Vh`.

    Returns:
        Program: Program holding only the harness `main`.

    Raises:
        UnknownFunctionError: If the program does not define the function.
    """
    params = program.function(function).params
    names = NameSupply()
    arguments = [names.fresh(f"arg_{param}") for param in params]
    result = names.fresh("result")
    body: list[Instruction] = []
    for argument in arguments:
        body += [VarDecl(argument, NIL), Read(argument)]
    body += [
        Call(result, FunRef(function), tuple(Var(argument) for argument in arguments)),
        Print(Var(result)),
        Stop(),
    ]
    instrs = InstructionStream.of((f"_{index}", instr) for index, instr in enumerate(body))
    return Program((Function(MAIN, (), (Version(version, instrs),)),))


def with_harness(program: Program, harness: Program) -> Program:
    """
    Replace functions of `program` by the functions of `harness` with the same names, adding the others.

    Args:
        program (Program): Program under test.
        harness (Program): Driver program, usually defining only `main`.

    Returns:
        Program: Combined program.
    """
    for function in harness:
        program = program.with_function(function)
    return program
