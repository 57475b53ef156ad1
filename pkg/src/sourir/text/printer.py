from __future__ import annotations

from io import StringIO
from typing import TYPE_CHECKING

from sourir.ir.expressions import ArrayRead, BoolLit, FunRef, IntLit, Length, NilLit, Op, Primop, Var
from sourir.ir.instructions import (
    ArrayAlloc,
    ArrayLit,
    ArrayStore,
    Assign,
    Assume,
    Branch,
    Call,
    Drop,
    Goto,
    Print,
    Read,
    Return,
    Stop,
    VarDecl,
)

if TYPE_CHECKING:
    from sourir.ir.expressions import Expr
    from sourir.ir.instructions import DeoptTarget, ExtraFrame, Instruction, Varmap
    from sourir.ir.program import Function, InstructionStream, Program

INDENT = "  "


def render_expr(expr: Expr) -> str:
    """
    Render an expression in surface syntax.

    Args:
        expr (Expr): Expression to render.

    Returns:
        str: Source text.
    """
    match expr:
        case IntLit(value):
            return str(value)
        case BoolLit(value):
            return "true" if value else "false"
        case NilLit():
            return "nil"
        case Var(name):
            return name
        case FunRef(name):
            return f"&{name}"
        case ArrayRead(array, index):
            return f"{render_expr(array)}[{render_expr(index)}]"
        case Length(array):
            return f"length({render_expr(array)})"
        case Primop(Op.NOT, (operand,)):
            return f"!{render_expr(operand)}"
        case Primop(Op.NEG, (operand,)):
            # a space keeps `- 5` apart from the literal `-5`
            return f"- {render_expr(operand)}" if isinstance(operand, IntLit) else f"-{render_expr(operand)}"
        case Primop(op, (left, right)):
            return f"{render_expr(left)} {op.symbol} {render_expr(right)}"
        case _:
            msg = f"Cannot render expression {expr!r}."
            raise TypeError(msg)


def render_varmap(varmap: Varmap) -> str:
    """
    Render a varmap as `[x = e, ...]`; an empty varmap is `[]`.

    Args:
        varmap (Varmap): Varmap to render.

    Returns:
        str: Source text.
    """
    return "[" + ", ".join(f"{name} = {render_expr(expr)}" for name, expr in varmap.bindings) + "]"


def _render_target(target: DeoptTarget) -> str:
    return f"{target.location} {render_varmap(target.varmap)}"


def _render_frame(frame: ExtraFrame) -> str:
    return f"{frame.location} ret {frame.ret_var} {render_varmap(frame.varmap)}"


def render_instruction(instr: Instruction) -> str:  # noqa: PLR0911
    """
    Render one instruction without its label.

    Args:
        instr (Instruction): Instruction to render.

    Returns:
        str: Source text.
    """
    match instr:
        case VarDecl(name, expr):
            return f"var {name} = {render_expr(expr)}"
        case Drop(name):
            return f"drop {name}"
        case Assign(name, expr):
            return f"{name} <- {render_expr(expr)}"
        case ArrayAlloc(name, size):
            return f"array {name}[{render_expr(size)}]"
        case ArrayLit(name, elements):
            return f"array {name} = [{', '.join(render_expr(element) for element in elements)}]"
        case ArrayStore(name, index, value):
            return f"{name}[{render_expr(index)}] <- {render_expr(value)}"
        case Branch(cond, then_label, else_label):
            return f"branch {render_expr(cond)} {then_label} {else_label}"
        case Goto(label):
            return f"goto {label}"
        case Print(expr):
            return f"print {render_expr(expr)}"
        case Read(name):
            return f"read {name}"
        case Call(name, callee, args):
            return f"call {name} = {render_expr(callee)}({', '.join(render_expr(arg) for arg in args)})"
        case Return(expr):
            return f"return {render_expr(expr)}"
        case Stop():
            return "stop"
        case Assume(predicates, target, frames):
            head = "assume " + ", ".join(render_expr(p) for p in predicates) if predicates else "assume"
            tail = "".join(f", {_render_frame(frame)}" for frame in frames)
            return f"{head} else {_render_target(target)}{tail}"


def render_stream(instrs: InstructionStream, *, indent: str = INDENT) -> str:
    """
    Render a stream, one labeled instruction per line.

    Args:
        instrs (InstructionStream): Stream to render.
        indent (str): Prefix of every line. Default is two spaces.

    Returns:
        str: Source text ending with a newline.
    """
    return "".join(f"{indent}{label}: {render_instruction(instr)}\n" for label, instr in instrs)


def render_function(function: Function) -> str:
    """
    Render a function with all of its versions, active first.

    Args:
        function (Function): Function to render.

    Returns:
        str: Source text ending with a newline.
    """
    stream = StringIO()
    stream.write(f"func {function.name}({', '.join(function.params)})\n")
    for version in function.versions:
        stream.write(f"version {version.label}\n")
        stream.write(render_stream(version.instrs))
    return stream.getvalue()


def render_program(program: Program) -> str:
    """
    Render a program canonically; parsing the result gives back an equal program.

    Args:
        program (Program): Program to render.

    Returns:
        str: Source text, functions separated by a blank line.
    """
    return "\n".join(render_function(function) for function in program.functions)
