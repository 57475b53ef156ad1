from __future__ import annotations

import dataclasses
import enum
from typing import TYPE_CHECKING, Final

from sourir.errors import InvalidProgramError

if TYPE_CHECKING:
    from collections.abc import Callable, Mapping

INT_MIN: Final[int] = -(2**63)
INT_MAX: Final[int] = 2**63 - 1


@dataclasses.dataclass(frozen=True, slots=True)
class IntLit:
    """Signed 64-bit integer literal."""

    value: int

    def __post_init__(self) -> None:
        if isinstance(self.value, bool) or not INT_MIN <= self.value <= INT_MAX:
            msg = f"Integer literal {self.value!r} is outside the signed 64-bit range."
            raise InvalidProgramError(msg)


@dataclasses.dataclass(frozen=True, slots=True)
class BoolLit:
    """Boolean literal."""

    value: bool


@dataclasses.dataclass(frozen=True, slots=True)
class NilLit:
    """The `nil` literal."""


type Literal = IntLit | BoolLit | NilLit

TRUE: Final = BoolLit(value=True)
FALSE: Final = BoolLit(value=False)
NIL: Final = NilLit()


@dataclasses.dataclass(frozen=True, slots=True)
class Var:
    """Reference to a variable of the current environment."""

    name: str


@dataclasses.dataclass(frozen=True, slots=True)
class FunRef:
    """Reference to a function of the program, written `&F`."""

    name: str


type SimpleExpr = IntLit | BoolLit | NilLit | Var | FunRef


class Op(enum.StrEnum):
    """Primitive operations. The value is the surface syntax of the operator."""

    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"
    EQ = "=="
    NEQ = "!="
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    AND = "&&"
    OR = "||"
    NOT = "!"
    NEG = "neg"

    @property
    def arity(self) -> int:
        """
        Number of operands the operation takes.

        Returns:
            int: 1 for `!` and unary minus, 2 otherwise.
        """
        return 1 if self in {Op.NOT, Op.NEG} else 2

    @property
    def symbol(self) -> str:
        """
        Surface syntax of the operator.

        Returns:
            str: Operator text as written in `.sourir` files.
        """
        return "-" if self is Op.NEG else self.value


BINARY_OPS: Final[dict[str, Op]] = {op.value: op for op in Op if op.arity == 2}


@dataclasses.dataclass(frozen=True, slots=True)
class ArrayRead:
    """Array element read `a[i]`."""

    array: SimpleExpr
    index: SimpleExpr


@dataclasses.dataclass(frozen=True, slots=True)
class Length:
    """Array length `length(a)`."""

    array: SimpleExpr


@dataclasses.dataclass(frozen=True, slots=True)
class Primop:
    """Primitive operation over simple operands."""

    op: Op
    args: tuple[SimpleExpr, ...]

    def __post_init__(self) -> None:
        if len(self.args) != self.op.arity:
            msg = f"Operation {self.op.symbol!r} takes {self.op.arity} operands, got {len(self.args)}."
            raise InvalidProgramError(msg)


type Expr = SimpleExpr | ArrayRead | Length | Primop

LITERAL_TYPES: Final = (IntLit, BoolLit, NilLit)
SIMPLE_TYPES: Final = (IntLit, BoolLit, NilLit, Var, FunRef)


def is_literal(expr: Expr) -> bool:
    """
    Check whether an expression is a literal.

    Args:
        expr (Expr): Expression to check.

    Returns:
        bool: True for `IntLit`, `BoolLit` and `NilLit`.
    """
    return isinstance(expr, LITERAL_TYPES)


def is_simple(expr: Expr) -> bool:
    """
    Check whether an expression is simple (a literal, a variable or a function reference).

    Args:
        expr (Expr): Expression to check.

    Returns:
        bool: True if the expression may be used as an operation operand.
    """
    return isinstance(expr, SIMPLE_TYPES)


def operands(expr: Expr) -> tuple[SimpleExpr, ...]:
    """
    Return the simple sub-expressions of an expression, itself for simple expressions.

    Args:
        expr (Expr): Expression to decompose.

    Returns:
        tuple[SimpleExpr, ...]: Operands in evaluation order.
    """
    match expr:
        case ArrayRead(array, index):
            return (array, index)
        case Length(array):
            return (array,)
        case Primop(_, args):
            return args
        case _:
            return (expr,)


def free_vars(expr: Expr) -> frozenset[str]:
    """
    Collect the variables an expression reads.

    Args:
        expr (Expr): Expression to inspect.

    Returns:
        frozenset[str]: Names of the variables used by the expression.
    """
    return frozenset(operand.name for operand in operands(expr) if isinstance(operand, Var))


def fun_refs(expr: Expr) -> frozenset[str]:
    """
    Collect the functions an expression references.

    Args:
        expr (Expr): Expression to inspect.

    Returns:
        frozenset[str]: Names of the referenced functions.
    """
    return frozenset(operand.name for operand in operands(expr) if isinstance(operand, FunRef))


def map_operands(expr: Expr, fn: Callable[[SimpleExpr], SimpleExpr]) -> Expr:
    """
    Rebuild an expression with every simple operand replaced by `fn(operand)`.

    Args:
        expr (Expr): Expression to rebuild.
        fn (Callable[[SimpleExpr], SimpleExpr]): Replacement applied to each operand.

    Returns:
        Expr: Rebuilt expression of the same shape.
    """
    match expr:
        case ArrayRead(array, index):
            return ArrayRead(fn(array), fn(index))
        case Length(array):
            return Length(fn(array))
        case Primop(op, args):
            return Primop(op, tuple(fn(arg) for arg in args))
        case _:
            return fn(expr)


def rename_vars(expr: Expr, renaming: Mapping[str, str]) -> Expr:
    """
    Rename the variables of an expression.

    Args:
        expr (Expr): Expression to rename.
        renaming (Mapping[str, str]): Old name to new name. Names not in the mapping are kept.

    Returns:
        Expr: Renamed expression.
    """

    def rename(operand: SimpleExpr) -> SimpleExpr:
        if isinstance(operand, Var) and operand.name in renaming:
            return Var(renaming[operand.name])
        return operand

    return map_operands(expr, rename)


def substitute(expr: Expr, bindings: Mapping[str, Expr]) -> Expr | None:
    """
    Replace variables by expressions.

    A variable may be replaced by a non-simple expression only when it is the whole expression, since operands
    must stay simple.

    Args:
        expr (Expr): Expression to rewrite.
        bindings (Mapping[str, Expr]): Variable name to replacement.

    Returns:
        Expr | None: Rewritten expression, or None if the result would be nested.
    """
    if isinstance(expr, Var):
        return bindings.get(expr.name, expr)

    nested = False

    def replace(operand: SimpleExpr) -> SimpleExpr:
        nonlocal nested
        if not isinstance(operand, Var) or operand.name not in bindings:
            return operand
        replacement = bindings[operand.name]
        if isinstance(replacement, SIMPLE_TYPES):
            return replacement
        nested = True
        return operand

    result = map_operands(expr, replace)
    return None if nested else result
