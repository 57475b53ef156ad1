from __future__ import annotations

import dataclasses
from typing import TYPE_CHECKING, NoReturn

from sourir.errors import DuplicateNameError, InvalidProgramError, NestedExpressionError, ParseError
from sourir.ir.expressions import (
    BINARY_OPS,
    INT_MAX,
    INT_MIN,
    NIL,
    ArrayRead,
    BoolLit,
    FunRef,
    IntLit,
    Length,
    Op,
    Primop,
    Var,
)
from sourir.ir.instructions import (
    ArrayAlloc,
    ArrayLit,
    ArrayStore,
    Assign,
    Assume,
    Branch,
    Call,
    DeoptTarget,
    Drop,
    ExtraFrame,
    Goto,
    Print,
    Read,
    Return,
    Stop,
    VarDecl,
    Varmap,
)
from sourir.ir.program import Function, InstructionStream, Program, Version
from sourir.text.lexer import KEYWORDS, Token, TokenKind, tokenize_line

if TYPE_CHECKING:
    from sourir.ir.expressions import Expr, Literal, SimpleExpr
    from sourir.ir.instructions import Instruction


class _Cursor:
    """Token cursor over a single line."""

    def __init__(self, tokens: list[Token], line: int, text: str) -> None:
        self._tokens = tokens
        self._index = 0
        self._line = line
        self._text = text

    def peek(self, offset: int = 0) -> Token | None:
        index = self._index + offset
        return self._tokens[index] if index < len(self._tokens) else None

    def next(self, what: str) -> Token:
        token = self.peek()
        if token is None:
            self.fail(f"expected {what}, got end of line")
        self._index += 1
        return token

    def at_end(self) -> bool:
        return self._index >= len(self._tokens)

    def accept_symbol(self, text: str) -> bool:
        token = self.peek()
        if token is not None and token.is_symbol(text):
            self._index += 1
            return True
        return False

    def expect_symbol(self, text: str) -> Token:
        token = self.next(repr(text))
        if not token.is_symbol(text):
            self.fail(f"expected {text!r}, got {token.text!r}", token)
        return token

    def expect_keyword(self, text: str) -> Token:
        token = self.next(repr(text))
        if not token.is_keyword(text):
            self.fail(f"expected {text!r}, got {token.text!r}", token)
        return token

    def expect_name(self, what: str) -> str:
        token = self.next(what)
        if token.kind is not TokenKind.IDENT or token.text in KEYWORDS:
            self.fail(f"expected {what}, got {token.text!r}", token)
        return token.text

    def expect_end(self) -> None:
        token = self.peek()
        if token is not None:
            self.fail(f"unexpected {token.text!r}", token)

    def fail(self, reason: str, token: Token | None = None) -> NoReturn:
        column = token.column if token else len(self._text) + 1
        raise ParseError(line=self._line, column=column, reason=reason)

    def nested(self, token: Token) -> NoReturn:
        reason = f"operand {token.text!r} is not a simple expression; expressions are not nested"
        raise NestedExpressionError(line=self._line, column=token.column, reason=reason)


def _parse_literal(cursor: _Cursor) -> Literal | None:
    token = cursor.peek()
    if token is None:
        return None
    if token.kind is TokenKind.NUMBER:
        cursor.next("number")
        return _int_literal(cursor, int(token.text), token)
    if token.is_symbol("-"):
        following = cursor.peek(1)
        if following is not None and following.kind is TokenKind.NUMBER and following.column == token.end:
            cursor.next("-")
            cursor.next("number")
            return _int_literal(cursor, -int(following.text), token)
        return None
    if token.is_keyword("true") or token.is_keyword("false"):
        cursor.next("boolean")
        return BoolLit(token.text == "true")
    if token.is_keyword("nil"):
        cursor.next("nil")
        return NIL
    return None


def _int_literal(cursor: _Cursor, value: int, token: Token) -> IntLit:
    if not INT_MIN <= value <= INT_MAX:
        cursor.fail(f"integer literal {value} does not fit in 64 bits", token)
    return IntLit(value)


def _parse_simple(cursor: _Cursor) -> SimpleExpr:
    literal = _parse_literal(cursor)
    if literal is not None:
        return literal
    token = cursor.next("an operand")
    if token.is_symbol("&"):
        return FunRef(cursor.expect_name("a function name"))
    if token.kind is TokenKind.IDENT and token.text not in KEYWORDS:
        return Var(token.text)
    if token.is_symbol("(") or token.is_keyword("length"):
        cursor.nested(token)
    cursor.fail(f"expected an operand, got {token.text!r}", token)


def _is_operator(token: Token | None) -> bool:
    return token is not None and token.kind is TokenKind.SYMBOL and (token.text in BINARY_OPS or token.text == "[")


def _parse_expr(cursor: _Cursor) -> Expr:
    token = cursor.peek()
    if token is None:
        cursor.fail("expected an expression")
    expr: Expr
    if token.is_symbol("("):
        cursor.nested(token)
    if token.is_symbol("!"):
        cursor.next("!")
        expr = Primop(Op.NOT, (_parse_simple(cursor),))
    elif token.is_symbol("-") and not _negative_literal_ahead(cursor):
        cursor.next("-")
        expr = Primop(Op.NEG, (_parse_simple(cursor),))
    elif token.is_keyword("length"):
        cursor.next("length")
        cursor.expect_symbol("(")
        expr = Length(_parse_simple(cursor))
        cursor.expect_symbol(")")
    else:
        left = _parse_simple(cursor)
        operator = cursor.peek()
        if operator is not None and operator.is_symbol("["):
            cursor.next("[")
            expr = ArrayRead(left, _parse_simple(cursor))
            cursor.expect_symbol("]")
        elif _is_operator(operator):
            assert operator is not None  # noqa: S101
            cursor.next("operator")
            expr = Primop(BINARY_OPS[operator.text], (left, _parse_simple(cursor)))
        else:
            expr = left
    following = cursor.peek()
    if _is_operator(following):
        assert following is not None  # noqa: S101
        cursor.nested(following)
    return expr


def _negative_literal_ahead(cursor: _Cursor) -> bool:
    token, following = cursor.peek(), cursor.peek(1)
    if token is None or following is None:
        return False
    return following.kind is TokenKind.NUMBER and following.column == token.end


def _parse_exprs_until(cursor: _Cursor, closing: str) -> tuple[Expr, ...]:
    exprs: list[Expr] = []
    if cursor.accept_symbol(closing):
        return ()
    while True:
        exprs.append(_parse_expr(cursor))
        if cursor.accept_symbol(closing):
            return tuple(exprs)
        cursor.expect_symbol(",")


def _parse_varmap(cursor: _Cursor) -> Varmap:
    start = cursor.expect_symbol("[")
    bindings: list[tuple[str, Expr]] = []
    if not cursor.accept_symbol("]"):
        while True:
            name = cursor.expect_name("a variable name")
            cursor.expect_symbol("=")
            bindings.append((name, _parse_expr(cursor)))
            if cursor.accept_symbol("]"):
                break
            cursor.expect_symbol(",")
    try:
        return Varmap(tuple(bindings))
    except InvalidProgramError as e:
        cursor.fail(str(e), start)


def _parse_location(cursor: _Cursor) -> tuple[str, str, str]:
    function = cursor.expect_name("a function name")
    cursor.expect_symbol(".")
    version = cursor.expect_name("a version label")
    cursor.expect_symbol(".")
    label = cursor.expect_name("a label")
    return function, version, label


def _parse_assume(cursor: _Cursor) -> Assume:
    predicates: list[Expr] = []
    token = cursor.peek()
    if token is None or not token.is_keyword("else"):
        predicates.append(_parse_expr(cursor))
        while cursor.accept_symbol(","):
            predicates.append(_parse_expr(cursor))
    cursor.expect_keyword("else")
    target = DeoptTarget(*_parse_location(cursor), varmap=_parse_varmap(cursor))
    frames: list[ExtraFrame] = []
    while cursor.accept_symbol(","):
        function, version, label = _parse_location(cursor)
        ret_token = cursor.expect_keyword("ret")
        ret_var = cursor.expect_name("a return variable")
        varmap = _parse_varmap(cursor)
        try:
            frames.append(ExtraFrame(function, version, label, ret_var, varmap))
        except InvalidProgramError as e:
            cursor.fail(str(e), ret_token)
    return Assume(tuple(predicates), target, tuple(frames))


def _parse_instruction(cursor: _Cursor) -> Instruction:  # noqa: C901, PLR0911, PLR0912
    token = cursor.next("an instruction")
    head = token.text if token.kind is TokenKind.IDENT else None
    instr: Instruction
    match head:
        case "var":
            name = cursor.expect_name("a variable name")
            cursor.expect_symbol("=")
            instr = VarDecl(name, _parse_expr(cursor))
        case "drop":
            instr = Drop(cursor.expect_name("a variable name"))
        case "array":
            name = cursor.expect_name("an array name")
            if cursor.accept_symbol("="):
                cursor.expect_symbol("[")
                instr = ArrayLit(name, _parse_exprs_until(cursor, "]"))
            else:
                cursor.expect_symbol("[")
                size = _parse_expr(cursor)
                cursor.expect_symbol("]")
                instr = ArrayAlloc(name, size)
        case "branch":
            cond = _parse_expr(cursor)
            instr = Branch(cond, cursor.expect_name("a label"), cursor.expect_name("a label"))
        case "goto":
            instr = Goto(cursor.expect_name("a label"))
        case "print":
            instr = Print(_parse_expr(cursor))
        case "read":
            instr = Read(cursor.expect_name("a variable name"))
        case "call":
            name = cursor.expect_name("a variable name")
            cursor.expect_symbol("=")
            callee = _parse_simple(cursor)
            cursor.expect_symbol("(")
            instr = Call(name, callee, _parse_exprs_until(cursor, ")"))
        case "return":
            instr = Return(_parse_expr(cursor))
        case "stop":
            instr = Stop()
        case "assume":
            instr = _parse_assume(cursor)
        case str(name) if name not in KEYWORDS:
            if cursor.accept_symbol("<-"):
                instr = Assign(name, _parse_expr(cursor))
            elif cursor.accept_symbol("["):
                index = _parse_expr(cursor)
                cursor.expect_symbol("]")
                cursor.expect_symbol("<-")
                instr = ArrayStore(name, index, _parse_expr(cursor))
            else:
                cursor.fail(f"unknown instruction {name!r}", token)
        case _:
            cursor.fail(f"unknown instruction {token.text!r}", token)
    cursor.expect_end()
    return instr


@dataclasses.dataclass(slots=True)
class _OpenVersion:
    label: str
    line: int
    instrs: list[tuple[str, Instruction]] = dataclasses.field(default_factory=list)
    explicit_labels: set[str] = dataclasses.field(default_factory=set)


@dataclasses.dataclass(slots=True)
class _OpenFunction:
    name: str
    params: tuple[str, ...]
    line: int
    versions: list[_OpenVersion] = dataclasses.field(default_factory=list)


class _ProgramBuilder:
    """Collects functions and versions while the parser walks the lines."""

    def __init__(self) -> None:
        self._functions: list[_OpenFunction] = []

    def open_function(self, cursor: _Cursor, line: int) -> None:
        name = cursor.expect_name("a function name")
        cursor.expect_symbol("(")
        params: list[str] = []
        if not cursor.accept_symbol(")"):
            while True:
                params.append(cursor.expect_name("a parameter name"))
                if cursor.accept_symbol(")"):
                    break
                cursor.expect_symbol(",")
        cursor.expect_end()
        if any(function.name == name for function in self._functions):
            cursor.fail(f"function {name!r} is defined twice")
        if len(set(params)) != len(params):
            cursor.fail(f"function {name!r} repeats a parameter")
        self._functions.append(_OpenFunction(name, tuple(params), line))

    def open_version(self, cursor: _Cursor, line: int) -> None:
        label = cursor.expect_name("a version label")
        cursor.expect_end()
        if not self._functions:
            cursor.fail("version outside of a function")
        function = self._functions[-1]
        if any(version.label == label for version in function.versions):
            cursor.fail(f"version {label!r} is defined twice in {function.name!r}")
        function.versions.append(_OpenVersion(label, line))

    def add_instruction(self, cursor: _Cursor, label: str | None, instr: Instruction) -> None:
        if not self._functions or not self._functions[-1].versions:
            cursor.fail("instruction outside of a version")
        version = self._functions[-1].versions[-1]
        if label is not None:
            if label in version.explicit_labels:
                cursor.fail(f"label {label!r} is defined twice")
            version.explicit_labels.add(label)
        version.instrs.append((label or "", instr))

    def build(self) -> Program:
        functions: list[Function] = []
        for function in self._functions:
            if not function.versions:
                raise ParseError(line=function.line, column=1, reason=f"function {function.name!r} has no version")
            versions: list[Version] = []
            for version in function.versions:
                if not version.instrs:
                    raise ParseError(line=version.line, column=1, reason=f"version {version.label!r} is empty")
                try:
                    stream = InstructionStream(tuple(_synthesize_labels(version)))
                except DuplicateNameError as e:
                    raise ParseError(line=version.line, column=1, reason=str(e)) from e
                versions.append(Version(version.label, stream))
            functions.append(Function(function.name, function.params, tuple(versions)))
        return Program(tuple(functions))


def _synthesize_labels(version: _OpenVersion) -> list[tuple[str, Instruction]]:
    return [(label or f"_{index}", instr) for index, (label, instr) in enumerate(version.instrs)]


def parse(text: str) -> Program:
    """
    Parse a `.sourir` program.

    Args:
        text (str): Program source.

    Returns:
        Program: Parsed program. Labels omitted in the source are synthesized as `_<position>`.

    Raises:
        ParseError: If the text does not follow the grammar.
        NestedExpressionError: If an operation operand is not a simple expression.
    """  # noqa: DOC502
    builder = _ProgramBuilder()
    for number, line in enumerate(text.splitlines(), start=1):
        tokens = tokenize_line(line, number)
        if not tokens:
            continue
        cursor = _Cursor(tokens, number, line)
        first, second = cursor.peek(), cursor.peek(1)
        assert first is not None  # noqa: S101
        if first.is_keyword("func"):
            cursor.next("func")
            builder.open_function(cursor, number)
        elif first.is_keyword("version"):
            cursor.next("version")
            builder.open_version(cursor, number)
        else:
            label: str | None = None
            if second is not None and second.is_symbol(":"):
                label = cursor.expect_name("a label")
                cursor.expect_symbol(":")
            builder.add_instruction(cursor, label, _parse_instruction(cursor))
    return builder.build()


def parse_expression(text: str) -> Expr:
    """
    Parse a single expression, as used by pipeline arguments.

    Args:
        text (str): Expression source.

    Returns:
        Expr: Parsed expression.
    """
    cursor = _Cursor(tokenize_line(text, 1), 1, text)
    expr = _parse_expr(cursor)
    cursor.expect_end()
    return expr


def parse_inputs(text: str) -> list[Literal]:
    """
    Parse an input script: literals separated by commas or newlines.

    Args:
        text (str): Script source.

    Returns:
        list[Literal]: Literals in order.
    """
    literals: list[Literal] = []
    for number, line in enumerate(text.splitlines(), start=1):
        tokens = tokenize_line(line, number)
        if not tokens:
            continue
        cursor = _Cursor(tokens, number, line)
        while True:
            literal = _parse_literal(cursor)
            if literal is None:
                token = cursor.peek()
                cursor.fail(f"expected a literal, got {token.text!r}" if token else "expected a literal", token)
            literals.append(literal)
            if cursor.at_end():
                break
            cursor.expect_symbol(",")
    return literals
