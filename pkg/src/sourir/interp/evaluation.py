"""Expression evaluation: the partial function from heap, environment and expression to a value."""

from __future__ import annotations

from typing import TYPE_CHECKING

from sourir.errors import ExecutionError, RuntimeErrorKind
from sourir.interp.values import Address, FunValue, describe
from sourir.ir.expressions import (
    FALSE,
    INT_MAX,
    INT_MIN,
    TRUE,
    ArrayRead,
    BoolLit,
    FunRef,
    IntLit,
    Length,
    NilLit,
    Op,
    Primop,
    Var,
)

if TYPE_CHECKING:
    from collections.abc import Mapping

    from sourir.interp.values import Environment, Heap, Value
    from sourir.ir.expressions import Expr, SimpleExpr
    from sourir.ir.instructions import Varmap


def eval_simple(env: Mapping[str, Value], expr: SimpleExpr) -> Value:
    """
    Evaluate a simple expression.

    Args:
        env (Mapping[str, Value]): Current environment.
        expr (SimpleExpr): Literal, variable or function reference.

    Returns:
        Value: Literals evaluate to themselves, `&F` to a function value, variables to their binding.

    Raises:
        ExecutionError: `UnboundVariable` if a variable is not bound.
    """
    match expr:
        case Var(name):
            try:
                return env[name]
            except KeyError as e:
                raise ExecutionError(kind=RuntimeErrorKind.UNBOUND_VARIABLE, message=f"{name!r} is unbound") from e
        case FunRef(name):
            return FunValue(name)
        case _:
            return expr


def _type_error(message: str) -> ExecutionError:
    return ExecutionError(kind=RuntimeErrorKind.TYPE_ERROR, message=message)


def as_int(value: Value, what: str = "operand") -> int:
    """
    Unwrap an integer value.

    Args:
        value (Value): Value to unwrap.
        what (str): Role of the value, used in the error message.

    Returns:
        int: Integer content.

    Raises:
        ExecutionError: `TypeError` if the value is not an integer.
    """
    if not isinstance(value, IntLit):
        raise _type_error(f"{what} must be an integer, got {describe(value)}")
    return value.value


def as_bool(value: Value, what: str = "operand") -> bool:
    """
    Unwrap a boolean value.

    Args:
        value (Value): Value to unwrap.
        what (str): Role of the value, used in the error message.

    Returns:
        bool: Boolean content.

    Raises:
        ExecutionError: `TypeError` if the value is not a boolean.
    """
    if not isinstance(value, BoolLit):
        raise _type_error(f"{what} must be a boolean, got {describe(value)}")
    return value.value


def as_address(value: Value, what: str = "operand") -> Address:
    """
    Unwrap an array address.

    Args:
        value (Value): Value to unwrap.
        what (str): Role of the value, used in the error message.

    Returns:
        Address: Heap address.

    Raises:
        ExecutionError: `TypeError` if the value is not an array.
    """
    if not isinstance(value, Address):
        raise _type_error(f"{what} must be an array, got {describe(value)}")
    return value


def checked_int(value: int) -> IntLit:
    """
    Wrap an arithmetic result, trapping on signed 64-bit overflow.

    Args:
        value (int): Mathematical result.

    Returns:
        IntLit: Wrapped result.

    Raises:
        ExecutionError: `IntegerOverflow` if the result does not fit.
    """
    if not INT_MIN <= value <= INT_MAX:
        raise ExecutionError(kind=RuntimeErrorKind.INTEGER_OVERFLOW, message=f"{value} does not fit in 64 bits")
    return IntLit(value)


def _divide(left: int, right: int) -> IntLit:
    if right == 0:
        raise ExecutionError(kind=RuntimeErrorKind.DIVISION_BY_ZERO, message=f"{left} / 0")
    quotient = abs(left) // abs(right)
    return checked_int(quotient if (left < 0) == (right < 0) else -quotient)


def apply_primop(op: Op, args: tuple[Value, ...]) -> Value:  # noqa: C901, PLR0911
    """
    Apply a primitive operation to evaluated operands.

    Arithmetic and ordering take integers, logic takes booleans, equality takes any two values: literals and functions
    compare structurally, arrays by address.

    Args:
        op (Op): Operation.
        args (tuple[Value, ...]): Operand values, as many as the operation's arity.

    Returns:
        Value: Result.

    Raises:
        ExecutionError: On wrong operand kinds, division by zero and overflow.
    """  # noqa: DOC502
    match op:
        case Op.EQ:
            return BoolLit(args[0] == args[1])
        case Op.NEQ:
            return BoolLit(args[0] != args[1])
        case Op.NOT:
            return BoolLit(not as_bool(args[0]))
        case Op.NEG:
            return checked_int(-as_int(args[0]))
        case Op.AND | Op.OR:
            # both operands are checked, so `false && 1` is a type error as well
            first, second = as_bool(args[0]), as_bool(args[1])
            return BoolLit(first and second if op is Op.AND else first or second)
    left, right = as_int(args[0]), as_int(args[1])
    match op:
        case Op.ADD:
            return checked_int(left + right)
        case Op.SUB:
            return checked_int(left - right)
        case Op.MUL:
            return checked_int(left * right)
        case Op.DIV:
            return _divide(left, right)
        case Op.LT:
            return TRUE if left < right else FALSE
        case Op.LE:
            return TRUE if left <= right else FALSE
        case Op.GT:
            return TRUE if left > right else FALSE
        case _:
            return TRUE if left >= right else FALSE


def eval_expr(heap: Heap, env: Mapping[str, Value], expr: Expr) -> Value:
    """
    Evaluate an expression.

    Args:
        heap (Heap): Current heap. Never modified.
        env (Mapping[str, Value]): Current environment.
        expr (Expr): Expression to evaluate.

    Returns:
        Value: Result.

    Raises:
        ExecutionError: When the expression has no value (the configuration is stuck).
    """  # noqa: DOC502
    match expr:
        case ArrayRead(array, index):
            address = as_address(eval_simple(env, array), "indexed value")
            return heap.load(address, as_int(eval_simple(env, index), "index"))
        case Length(array):
            return IntLit(heap.length(as_address(eval_simple(env, array), "argument of length")))
        case Primop(op, args):
            return apply_primop(op, tuple(eval_simple(env, arg) for arg in args))
        case IntLit() | BoolLit() | NilLit() | Var() | FunRef():
            return eval_simple(env, expr)


def eval_varmap(heap: Heap, env: Mapping[str, Value], varmap: Varmap) -> Environment:
    """
    Build a fresh environment from a varmap, evaluating every binding in the old environment.

    Args:
        heap (Heap): Current heap.
        env (Mapping[str, Value]): Environment being left.
        varmap (Varmap): Bindings of the new environment.

    Returns:
        Environment: New environment with exactly the varmap's names.
    """
    return {name: eval_expr(heap, env, expr) for name, expr in varmap.bindings}
