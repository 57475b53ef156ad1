"""
Speculative constant propagation.

A forward dataflow analysis maps every variable to a constant, to a known inequality with a literal, or to unknown.
Assume predicates of the form `x == c` and `x != c` add facts on the edge leaving the assume, since execution only
continues there when they hold. The rewrite phase replaces every foldable expression, deoptimization metadata included.
"""

from __future__ import annotations

import dataclasses
import logging
from collections import deque
from collections.abc import Iterator, Mapping
from typing import TYPE_CHECKING, Final

from sourir.analysis.scope import deopt_entry_labels, successors_within
from sourir.errors import ExecutionError
from sourir.interp.evaluation import eval_expr
from sourir.interp.values import FunValue, Heap
from sourir.ir.expressions import (
    FALSE,
    LITERAL_TYPES,
    TRUE,
    BoolLit,
    FunRef,
    IntLit,
    NilLit,
    Op,
    Primop,
    Var,
    map_operands,
)
from sourir.ir.instructions import (
    ArrayAlloc,
    ArrayLit,
    Assign,
    Assume,
    Call,
    Drop,
    Read,
    VarDecl,
    map_expressions,
)
from sourir.passes.base import PassReport

if TYPE_CHECKING:
    from sourir.interp.values import Value
    from sourir.ir.expressions import Expr, Literal, SimpleExpr
    from sourir.ir.instructions import Instruction
    from sourir.ir.program import Program

logger = logging.getLogger(__name__)

type Constant = IntLit | BoolLit | NilLit | FunRef


@dataclasses.dataclass(frozen=True, slots=True)
class Const:
    """The variable holds exactly this value."""

    value: Constant


@dataclasses.dataclass(frozen=True, slots=True)
class NotConst:
    """The variable is known to differ from this literal."""

    value: Literal


@dataclasses.dataclass(frozen=True, slots=True)
class Unknown:
    """Nothing is known about the variable."""


UNKNOWN: Final = Unknown()

type AbstractValue = Const | NotConst | Unknown


class AbstractEnv(Mapping[str, Const | NotConst]):
    """
    Facts about variables at one program point. Variables without a fact are unknown.

    Instances are immutable; the update methods return new environments.
    """

    def __init__(self, facts: Mapping[str, Const | NotConst] | None = None) -> None:
        self._facts = dict(facts or {})

    def __getitem__(self, name: str, /) -> Const | NotConst:
        return self._facts[name]

    def __len__(self) -> int:
        return len(self._facts)

    def __iter__(self) -> Iterator[str]:
        return iter(self._facts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AbstractEnv):
            return NotImplemented
        return self._facts == other._facts

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"AbstractEnv({self._facts!r})"

    def lookup(self, name: str) -> AbstractValue:
        """
        Fact about a variable.

        Args:
            name (str): Variable name.

        Returns:
            AbstractValue: The fact, or `UNKNOWN`.
        """
        return self._facts.get(name, UNKNOWN)

    def with_fact(self, name: str, fact: AbstractValue) -> AbstractEnv:
        """
        Return a copy where `name` has a new fact.

        Args:
            name (str): Variable name.
            fact (AbstractValue): New fact; `UNKNOWN` forgets the variable.

        Returns:
            AbstractEnv: Updated environment.
        """
        facts = dict(self._facts)
        if isinstance(fact, Unknown):
            facts.pop(name, None)
        else:
            facts[name] = fact
        return AbstractEnv(facts)

    def join(self, other: AbstractEnv) -> AbstractEnv:
        """
        Merge the facts of two incoming edges: facts on which both sides agree are kept, the others become unknown.

        Args:
            other (AbstractEnv): Environment of the other edge.

        Returns:
            AbstractEnv: Merged environment.
        """
        return AbstractEnv({name: fact for name, fact in self._facts.items() if other._facts.get(name) == fact})


def _as_constant(value: Value) -> Constant | None:
    if isinstance(value, LITERAL_TYPES):
        return value
    if isinstance(value, FunValue):
        return FunRef(value.name)
    return None


def fold_expr(expr: Expr, env: AbstractEnv) -> Expr:
    """
    Replace known variables by their constants and evaluate operations over constants.

    An operation whose evaluation fails is kept, so folding never hides a runtime error.

    Args:
        expr (Expr): Expression to fold.
        env (AbstractEnv): Facts in force where the expression is evaluated.

    Returns:
        Expr: Folded expression.
    """

    def known(operand: SimpleExpr) -> SimpleExpr:
        if isinstance(operand, Var):
            fact = env.lookup(operand.name)
            if isinstance(fact, Const):
                return fact.value
        return operand

    folded = map_operands(expr, known)
    if not isinstance(folded, Primop):
        return folded
    if folded.op in {Op.EQ, Op.NEQ}:
        decided = _decide_inequality(folded, env)
        if decided is not None:
            return decided
    if any(isinstance(arg, Var) for arg in folded.args):
        return folded
    try:
        value = eval_expr(Heap(), {}, folded)
    except ExecutionError:
        return folded
    return _as_constant(value) or folded


def _decide_inequality(expr: Primop, env: AbstractEnv) -> BoolLit | None:
    left, right = expr.args
    if isinstance(right, Var):
        left, right = right, left
    if not isinstance(left, Var) or not isinstance(right, LITERAL_TYPES):
        return None
    fact = env.lookup(left.name)
    if isinstance(fact, NotConst) and fact.value == right:
        return FALSE if expr.op is Op.EQ else TRUE
    return None


def _assumed_facts(predicate: Expr) -> tuple[str, AbstractValue] | None:
    if not isinstance(predicate, Primop) or predicate.op not in {Op.EQ, Op.NEQ}:
        return None
    left, right = predicate.args
    if isinstance(right, Var):
        left, right = right, left
    if not isinstance(left, Var) or isinstance(right, Var):
        return None
    if predicate.op is Op.EQ:
        return left.name, Const(right)
    if isinstance(right, LITERAL_TYPES):
        return left.name, NotConst(right)
    return None


def transfer_constants(env: AbstractEnv, instr: Instruction) -> AbstractEnv:
    """
    Facts after an instruction, on its fall-through or jump edges.

    Args:
        env (AbstractEnv): Facts before the instruction.
        instr (Instruction): Instruction to interpret.

    Returns:
        AbstractEnv: Facts after the instruction.
    """
    match instr:
        case VarDecl(name, expr) | Assign(name, expr):
            folded = fold_expr(expr, env)
            constant = folded if isinstance(folded, (*LITERAL_TYPES, FunRef)) else None
            return env.with_fact(name, Const(constant) if constant is not None else UNKNOWN)
        case Drop(name) | Read(name) | Call(name, _, _) | ArrayAlloc(name, _) | ArrayLit(name, _):
            return env.with_fact(name, UNKNOWN)
        case Assume(predicates, _, _):
            for predicate in predicates:
                fact = _assumed_facts(fold_expr(predicate, env))
                if fact is not None and not isinstance(env.lookup(fact[0]), Const):
                    env = env.with_fact(*fact)
            return env
        case _:
            return env


def analyze_constants(program: Program, function: str, version: str) -> dict[str, AbstractEnv]:
    """
    Compute the facts on entry to every reachable label of `function.version`.

    Labels entered by deoptimization start without facts, since the incoming environment is built by a varmap.

    Args:
        program (Program): Program holding the version.
        function (str): Function name.
        version (str): Version label.

    Returns:
        dict[str, AbstractEnv]: Facts per label. Labels that are never reached are absent.
    """
    instrs = program.stream(function, version)
    facts: dict[str, AbstractEnv] = {}
    if not len(instrs):
        return facts
    seeds = [instrs.entry, *sorted(deopt_entry_labels(program, function, version) & set(instrs.labels))]
    worklist: deque[str] = deque()
    for seed in seeds:
        facts[seed] = AbstractEnv()
        worklist.append(seed)
    while worklist:
        label = worklist.popleft()
        after = transfer_constants(facts[label], instrs.lookup(label))
        for successor in sorted(successors_within(instrs, label)):
            known = facts.get(successor)
            merged = after if known is None else known.join(after)
            if merged != known:
                facts[successor] = merged
                worklist.append(successor)
    return facts


def constant_propagate(program: Program, function: str, version: str) -> tuple[Program, PassReport]:
    """
    Fold constants in every expression of a version, predicates and varmaps included.

    Args:
        program (Program): Program to transform.
        function (str): Function name.
        version (str): Version label.

    Returns:
        tuple[Program, PassReport]: Transformed program and report.
    """
    facts = analyze_constants(program, function, version)
    rewrites = 0

    def rewrite(label: str, instr: Instruction) -> Instruction:
        nonlocal rewrites
        env = facts.get(label)
        if env is None:
            return instr
        folded = map_expressions(instr, lambda expr: fold_expr(expr, env))
        if folded != instr:
            rewrites += 1
        return folded

    edited = program.stream(function, version).map(rewrite)
    result = program.with_stream(function, version, edited)
    logger.debug("Constant propagation rewrote %d instructions of %s.%s", rewrites, function, version)
    return result, PassReport.compare("constant-propagate", program, result, rewrites)
