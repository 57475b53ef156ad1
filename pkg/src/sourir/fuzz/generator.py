"""
Seeded generation of well-formed programs and input scripts.

Generated code is structured: straight-line statements, two-armed branches joining again, and counted loops. Every
nested block drops what it declared before control leaves it, so scopes agree at every join and loop header.
Variables carry a coarse kind so operations rarely fail at runtime, and variables that may hold an array are never
compared with each other.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import random
from typing import TYPE_CHECKING

from sourir.analysis.scope import scope_at
from sourir.errors import SourirError
from sourir.ir.expressions import (
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
from sourir.ir.names import NameSupply
from sourir.ir.program import MAIN, Function, InstructionStream, Program, Version
from sourir.passes.versioning import create_version, inject_predicate, insert_assume

if TYPE_CHECKING:
    from collections.abc import Sequence

    from sourir.fuzz.config import GenConfig
    from sourir.ir.expressions import Expr, Literal, SimpleExpr
    from sourir.ir.instructions import Instruction

logger = logging.getLogger(__name__)

BASE_VERSION = "V0"
_MAX_NESTING = 2
_MAX_LOOP_COUNT = 3


class Kind(enum.Enum):
    """Coarse runtime kind of a generated variable."""

    INT = enum.auto()
    BOOL = enum.auto()
    ARRAY = enum.auto()
    ANY = enum.auto()
    """A literal of unknown kind; never an array."""


@dataclasses.dataclass(slots=True)
class _Variable:
    name: str
    kind: Kind
    length: int | None = None
    """Statically known length of an array."""
    protected: bool = False
    """Loop counters are never written or dropped by generated statements."""


@dataclasses.dataclass(frozen=True, slots=True)
class _Shape:
    name: str
    params: tuple[tuple[str, Kind], ...]
    returns: Kind
    callees: tuple[_Shape, ...]


class _BodyBuilder:
    """Emits the labeled instructions of one version body."""

    def __init__(self, rng: random.Random, cfg: GenConfig, shape: _Shape | None, callees: tuple[_Shape, ...]) -> None:
        self._rng = rng
        self._cfg = cfg
        self._shape = shape
        self._callees = callees
        self._names = NameSupply(name for name, _ in shape.params) if shape else NameSupply()
        self._instrs: list[tuple[str, Instruction]] = []
        self._next_label = 0
        self._pending: str | None = None
        self._budget = cfg.max_instructions
        params = [_Variable(name, kind) for name, kind in shape.params] if shape else []
        self._blocks: list[list[_Variable]] = [params]

    def build(self) -> InstructionStream:
        self._statements(depth=0, count=None)
        if self._shape is None:
            self._emit(Stop())
        else:
            self._emit(Return(self._expr(self._shape.returns)))
        return InstructionStream.of(self._instrs)

    # Labels and emission

    def _label(self) -> str:
        label = f"L{self._next_label}"
        self._next_label += 1
        return label

    def _emit(self, instr: Instruction, label: str | None = None) -> None:
        if label is None:
            label, self._pending = self._pending or self._label(), None
        self._instrs.append((label, instr))
        self._budget -= 1

    def _continue_at(self, label: str) -> None:
        self._pending = label

    # Scope

    @property
    def _visible(self) -> list[_Variable]:
        return [variable for block in self._blocks for variable in block]

    def _of_kind(self, *kinds: Kind) -> list[_Variable]:
        return [variable for variable in self._visible if variable.kind in kinds]

    def _declare(self, base: str, kind: Kind, length: int | None = None, *, protected: bool = False) -> _Variable:
        variable = _Variable(self._names.fresh(base), kind, length, protected)
        self._blocks[-1].append(variable)
        return variable

    def _close_block(self) -> None:
        for variable in reversed(self._blocks.pop()):
            self._emit(Drop(variable.name))

    # Expressions

    def _literal(self, kind: Kind) -> Literal:
        pool = self._cfg.literal_pool
        match kind:
            case Kind.INT:
                candidates: Sequence[Literal] = [lit for lit in pool if isinstance(lit, IntLit)] or [IntLit(0)]
            case Kind.BOOL:
                candidates = [lit for lit in pool if isinstance(lit, BoolLit)] or [BoolLit(value=True)]
            case _:
                candidates = pool
        return self._rng.choice(candidates)

    def _simple(self, kind: Kind) -> SimpleExpr:
        kinds = (Kind.INT, Kind.BOOL, Kind.ANY) if kind is Kind.ANY else (kind,)
        variables = self._of_kind(*kinds)
        if variables and self._rng.random() < 0.7:
            return Var(self._rng.choice(variables).name)
        return self._literal(kind)

    def _expr(self, kind: Kind) -> Expr:  # noqa: PLR0911
        rng = self._rng
        match kind:
            case Kind.INT:
                choice = rng.randrange(6)
                arrays = self._of_kind(Kind.ARRAY)
                if choice == 0:
                    op = rng.choice([Op.ADD, Op.SUB, Op.MUL])
                    return Primop(op, (self._simple(Kind.INT), self._simple(Kind.INT)))
                if choice == 1:
                    divisor = self._literal(Kind.INT)
                    if divisor == IntLit(0):
                        divisor = IntLit(2)
                    return Primop(Op.DIV, (self._simple(Kind.INT), divisor))
                if choice == 2:  # noqa: PLR2004
                    return Primop(Op.NEG, (self._simple(Kind.INT),))
                if choice == 3 and arrays:  # noqa: PLR2004
                    return Length(Var(rng.choice(arrays).name))
                return self._simple(Kind.INT)
            case Kind.BOOL:
                choice = rng.randrange(5)
                if choice == 0:
                    op = rng.choice([Op.LT, Op.LE, Op.GT, Op.GE])
                    return Primop(op, (self._simple(Kind.INT), self._simple(Kind.INT)))
                if choice == 1:
                    op = rng.choice([Op.EQ, Op.NEQ])
                    return Primop(op, (self._simple(Kind.ANY), self._literal(Kind.ANY)))
                if choice == 2:  # noqa: PLR2004
                    return Primop(Op.NOT, (self._simple(Kind.BOOL),))
                if choice == 3:  # noqa: PLR2004
                    op = rng.choice([Op.AND, Op.OR])
                    return Primop(op, (self._simple(Kind.BOOL), self._simple(Kind.BOOL)))
                return self._simple(Kind.BOOL)
            case Kind.ANY:
                readable = [a for a in self._of_kind(Kind.ARRAY) if a.length]
                if readable and rng.random() < 0.3:
                    array = rng.choice(readable)
                    return ArrayRead(Var(array.name), IntLit(rng.randrange(array.length or 1)))
                return self._expr(rng.choice([Kind.INT, Kind.BOOL])) if rng.random() < 0.5 else self._simple(kind)
            case Kind.ARRAY:
                msg = "Array expressions are generated by array statements only."
                raise ValueError(msg)

    # Statements

    def _applicable(self, depth: int) -> list[str]:
        kinds = ["var", "print", "read"]
        if any(not v.protected and v.kind is not Kind.ARRAY for v in self._visible):
            kinds.append("assign")
        if any(not v.protected for v in self._blocks[-1]):
            kinds.append("drop")
        kinds.append("array")
        if any(v.length for v in self._of_kind(Kind.ARRAY)):
            kinds.append("store")
        if depth < _MAX_NESTING and self._budget >= 4:  # noqa: PLR2004
            kinds += ["branch", "loop"]
        if self._callable():
            kinds.append("call")
        return [kind for kind in kinds if self._cfg.weight(kind) > 0]

    def _callable(self) -> list[_Shape]:
        arrays = bool(self._of_kind(Kind.ARRAY))
        return [shape for shape in self._callees if arrays or all(kind is not Kind.ARRAY for _, kind in shape.params)]

    def _statements(self, depth: int, count: int | None) -> None:
        emitted = 0
        while self._budget > 1 and (count is None or emitted < count):
            kinds = self._applicable(depth)
            if not kinds:
                break
            kind = self._rng.choices(kinds, weights=[self._cfg.weight(k) for k in kinds])[0]
            self._statement(kind, depth)
            emitted += 1

    def _statement(self, kind: str, depth: int) -> None:  # noqa: C901
        rng = self._rng
        match kind:
            case "var":
                var_kind = rng.choice([Kind.INT, Kind.INT, Kind.BOOL, Kind.ANY])
                expr = self._expr(var_kind)
                self._emit(VarDecl(self._declare("v", var_kind).name, expr))
            case "assign":
                target = rng.choice([v for v in self._visible if not v.protected and v.kind is not Kind.ARRAY])
                self._emit(Assign(target.name, self._expr(target.kind)))
            case "drop":
                victim = rng.choice([v for v in self._blocks[-1] if not v.protected])
                self._blocks[-1].remove(victim)
                self._emit(Drop(victim.name))
            case "array":
                length = rng.randint(0, self._cfg.max_array_length)
                if rng.random() < 0.5:  # noqa: PLR2004
                    self._emit(ArrayAlloc(self._declare("a", Kind.ARRAY, length).name, IntLit(length)))
                else:
                    elements = tuple(self._simple(Kind.INT) for _ in range(length))
                    self._emit(ArrayLit(self._declare("a", Kind.ARRAY, length).name, elements))
            case "store":
                array = rng.choice([v for v in self._of_kind(Kind.ARRAY) if v.length])
                index = IntLit(rng.randrange(array.length or 1))
                self._emit(ArrayStore(array.name, index, self._expr(Kind.INT)))
            case "print":
                self._emit(Print(self._expr(rng.choice([Kind.INT, Kind.BOOL, Kind.ANY]))))
            case "read":
                self._read()
            case "call":
                self._call(rng.choice(self._callable()))
            case "branch":
                self._branch(depth)
            case "loop":
                self._loop(depth)

    def _read(self) -> None:
        writable = [v for v in self._of_kind(Kind.ANY) if not v.protected]
        if writable and self._rng.random() < 0.5:  # noqa: PLR2004
            self._emit(Read(self._rng.choice(writable).name))
            return
        variable = self._declare("in", Kind.ANY)
        self._emit(VarDecl(variable.name, NIL))
        self._emit(Read(variable.name))

    def _call(self, callee: _Shape) -> None:
        arguments: list[SimpleExpr] = []
        for _, kind in callee.params:
            if kind is Kind.ARRAY:
                arguments.append(Var(self._rng.choice(self._of_kind(Kind.ARRAY)).name))
            else:
                arguments.append(self._simple(kind))
        result = self._declare("r", callee.returns)
        self._emit(Call(result.name, FunRef(callee.name), tuple(arguments)))

    def _branch(self, depth: int) -> None:
        then_label, else_label, join = self._label(), self._label(), self._label()
        self._emit(Branch(self._expr(Kind.BOOL), then_label, else_label))
        for arm in (then_label, else_label):
            self._continue_at(arm)
            self._blocks.append([])
            self._statements(depth + 1, self._rng.randint(0, 3))
            self._close_block()
            self._emit(Goto(join))
        self._continue_at(join)

    def _loop(self, depth: int) -> None:
        counter = self._declare("i", Kind.INT, protected=True)
        self._emit(VarDecl(counter.name, IntLit(0)))
        header, body, exit_label = self._label(), self._label(), self._label()
        bound = IntLit(self._rng.randint(1, _MAX_LOOP_COUNT))
        self._emit(Branch(Primop(Op.LT, (Var(counter.name), bound)), body, exit_label), header)
        self._continue_at(body)
        self._blocks.append([])
        self._statements(depth + 1, self._rng.randint(1, 3))
        self._close_block()
        self._emit(Assign(counter.name, Primop(Op.ADD, (Var(counter.name), IntLit(1)))))
        self._emit(Goto(header))
        self._continue_at(exit_label)
        self._blocks[-1].remove(counter)
        self._emit(Drop(counter.name))


def _shapes(rng: random.Random, cfg: GenConfig) -> list[_Shape]:
    count = rng.randint(0, cfg.max_functions - 1)
    last_callable = min(count, cfg.max_call_depth)
    shapes: dict[int, _Shape] = {}
    # f<i> only calls f<j> for i < j <= max_call_depth, so call chains from main stay within the depth bound.
    for index in range(count, 0, -1):
        names = NameSupply()
        params = tuple(
            (names.fresh(rng.choice("pqxyz")), rng.choice([Kind.INT, Kind.BOOL, Kind.ANY, Kind.ARRAY]))
            for _ in range(rng.randint(0, 2))
        )
        callees = tuple(shapes[j] for j in range(index + 1, last_callable + 1))
        shapes[index] = _Shape(f"f{index}", params, rng.choice([Kind.INT, Kind.ANY]), callees)
    return [shapes[index] for index in range(1, count + 1)]


def _guard(rng: random.Random, cfg: GenConfig, program: Program, function: str, version: str, at: str) -> Program:
    program = insert_assume(program, function, version, at)
    scope = sorted(scope_at(program, function, version).get(at, frozenset()))
    if not scope:
        return program
    return inject_predicate(program, function, version, at, random_predicate(rng, cfg, scope))


def _add_versions(rng: random.Random, cfg: GenConfig, program: Program, function: str) -> Program:
    for number in range(1, rng.randint(1, cfg.max_versions)):
        labels = program.function(function).active.instrs.labels
        seeds = rng.sample(labels, k=min(len(labels), rng.randint(1, 2)))
        version = f"V{number}"
        program = create_version(program, function, version)
        for seed in seeds:
            try:
                program = _guard(rng, cfg, program, function, version, seed)
            except SourirError as e:
                logger.debug("Skipping assume at %s.%s.%s: %s", function, version, seed, e)
    return program


def random_predicate(rng: random.Random, cfg: GenConfig, scope: Sequence[str]) -> Expr:
    """
    Draw an assume predicate that can never fail to evaluate: a variable compared to a literal.

    Args:
        rng (random.Random): Source of randomness.
        cfg (GenConfig): Literal pool.
        scope (Sequence[str]): Variables in scope, not empty.

    Returns:
        Expr: `x == lit` or `x != lit`.
    """
    op = rng.choice([Op.EQ, Op.NEQ, Op.NEQ])
    return Primop(op, (Var(rng.choice(scope)), rng.choice(cfg.literal_pool)))


def gen_program(cfg: GenConfig) -> Program:
    """
    Generate a well-formed program.

    The call graph is acyclic and its depth bounded by `max_call_depth`. Extra versions are fresh copies guarded by
    assumes with random predicates, deoptimizing to the version they were copied from.

    Args:
        cfg (GenConfig): Bounds, weights and seed.

    Returns:
        Program: Program accepted by `check_program`.
    """
    rng = random.Random(f"{cfg.seed}:program")
    shapes = _shapes(rng, cfg)
    main = _BodyBuilder(rng, cfg, None, tuple(shapes[: cfg.max_call_depth])).build()
    functions = [Function(MAIN, (), (Version(BASE_VERSION, main),))]
    for shape in shapes:
        body = _BodyBuilder(rng, cfg, shape, shape.callees).build()
        functions.append(Function(shape.name, tuple(name for name, _ in shape.params), (Version(BASE_VERSION, body),)))
    program = Program(tuple(functions))
    for function in program.function_names:
        program = _add_versions(rng, cfg, program, function)
    logger.debug("Generated program for seed %d with %d functions", cfg.seed, len(functions))
    return program


def count_reads(program: Program) -> int:
    """
    Count `read` instructions over every version.

    Args:
        program (Program): Program to scan.

    Returns:
        int: Number of reads.
    """
    return sum(
        isinstance(instr, Read) for function in program for version in function.versions for _, instr in version.instrs
    )


def gen_inputs(cfg: GenConfig, program: Program, *, variant: int = 0) -> list[Literal]:
    """
    Generate an input script for a program.

    Args:
        cfg (GenConfig): Literal pool, slack factor and seed.
        program (Program): Program the script feeds.
        variant (int): Index distinguishing several scripts for the same seed. Default is 0.

    Returns:
        list[Literal]: Literals drawn from the pool, `input_slack` per static read.
    """
    rng = random.Random(f"{cfg.seed}:inputs:{variant}")
    return [rng.choice(cfg.literal_pool) for _ in range(count_reads(program) * cfg.input_slack)]

