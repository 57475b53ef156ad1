from __future__ import annotations

import dataclasses
from typing import TYPE_CHECKING

from sourir.errors import InvalidProgramError
from sourir.ir.expressions import TRUE, Var, free_vars, fun_refs

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable

    from sourir.ir.expressions import Expr


@dataclasses.dataclass(frozen=True, slots=True)
class Varmap:
    """
    Ordered bindings `[x1 = e1, ...]` building a fresh environment during deoptimization.

    All expressions are evaluated in the environment that is being left.
    """

    bindings: tuple[tuple[str, Expr], ...] = ()

    def __post_init__(self) -> None:
        names = [name for name, _ in self.bindings]
        if len(names) != len(set(names)):
            msg = f"Varmap binds a variable twice: {names!r}."
            raise InvalidProgramError(msg)

    @classmethod
    def identity(cls, names: Iterable[str]) -> Varmap:
        """
        Build the identity varmap `[x = x, ...]` over a set of names, sorted for stable output.

        Args:
            names (Iterable[str]): Variable names to bind.

        Returns:
            Varmap: Identity varmap.
        """
        return cls(tuple((name, Var(name)) for name in sorted(names)))

    @property
    def names(self) -> tuple[str, ...]:
        """
        Names bound by the varmap, in order.

        Returns:
            tuple[str, ...]: Bound names.
        """
        return tuple(name for name, _ in self.bindings)

    def as_dict(self) -> dict[str, Expr]:
        """
        Return the bindings as a dictionary.

        Returns:
            dict[str, Expr]: Name to expression.
        """
        return dict(self.bindings)

    def map_exprs(self, fn: Callable[[Expr], Expr]) -> Varmap:
        """
        Rebuild the varmap with every expression rewritten.

        Args:
            fn (Callable[[Expr], Expr]): Rewriting applied to each bound expression.

        Returns:
            Varmap: Varmap with the same names.
        """
        return Varmap(tuple((name, fn(expr)) for name, expr in self.bindings))

    def uses(self) -> frozenset[str]:
        """
        Variables read by the bound expressions.

        Returns:
            frozenset[str]: Used variable names.
        """
        return frozenset().union(*(free_vars(expr) for _, expr in self.bindings))


@dataclasses.dataclass(frozen=True, slots=True)
class DeoptTarget:
    """Location `F.V.L` an assume transfers control to, together with the varmap for the new environment."""

    function: str
    version: str
    label: str
    varmap: Varmap = Varmap()

    @property
    def location(self) -> str:
        """
        Target location in the `F.V.L` form.

        Returns:
            str: Location string.
        """
        return f"{self.function}.{self.version}.{self.label}"


@dataclasses.dataclass(frozen=True, slots=True)
class ExtraFrame:
    """Caller continuation synthesized on deoptimization, returning into `F.V.L` and binding `ret_var`."""

    function: str
    version: str
    label: str
    ret_var: str
    varmap: Varmap = Varmap()

    def __post_init__(self) -> None:
        if self.ret_var in self.varmap.names:
            msg = f"Extra frame binds its return variable {self.ret_var!r} in the varmap."
            raise InvalidProgramError(msg)

    @property
    def location(self) -> str:
        """
        Return location in the `F.V.L` form.

        Returns:
            str: Location string.
        """
        return f"{self.function}.{self.version}.{self.label}"


@dataclasses.dataclass(frozen=True, slots=True)
class VarDecl:
    """`var x = e`"""

    name: str
    expr: Expr


@dataclasses.dataclass(frozen=True, slots=True)
class Drop:
    """`drop x`"""

    name: str


@dataclasses.dataclass(frozen=True, slots=True)
class Assign:
    """`x <- e`"""

    name: str
    expr: Expr


@dataclasses.dataclass(frozen=True, slots=True)
class ArrayAlloc:
    """`array x[e]`, a block of `e` cells initialized to nil."""

    name: str
    size: Expr


@dataclasses.dataclass(frozen=True, slots=True)
class ArrayLit:
    """`array x = [e1, ..., en]`"""

    name: str
    elements: tuple[Expr, ...]


@dataclasses.dataclass(frozen=True, slots=True)
class ArrayStore:
    """`x[e1] <- e2`"""

    name: str
    index: Expr
    value: Expr


@dataclasses.dataclass(frozen=True, slots=True)
class Branch:
    """`branch e L1 L2`"""

    cond: Expr
    then_label: str
    else_label: str


@dataclasses.dataclass(frozen=True, slots=True)
class Goto:
    """`goto L`"""

    label: str


@dataclasses.dataclass(frozen=True, slots=True)
class Print:
    """`print e`"""

    expr: Expr


@dataclasses.dataclass(frozen=True, slots=True)
class Read:
    """`read x`"""

    name: str


@dataclasses.dataclass(frozen=True, slots=True)
class Call:
    """`call x = e(e1, ..., en)`"""

    name: str
    callee: Expr
    args: tuple[Expr, ...]


@dataclasses.dataclass(frozen=True, slots=True)
class Return:
    """`return e`"""

    expr: Expr


@dataclasses.dataclass(frozen=True, slots=True)
class Assume:
    """`assume e1, ..., en else F.V.L [varmap]` with optional extra frames."""

    predicates: tuple[Expr, ...]
    target: DeoptTarget
    extra_frames: tuple[ExtraFrame, ...] = ()

    @property
    def is_trivial(self) -> bool:
        """
        Whether the assume can never fail: no predicates, or only the literal `true`.

        Returns:
            bool: True if every predicate is the literal true.
        """
        return all(predicate == TRUE for predicate in self.predicates)

    def deopt_varmaps(self) -> tuple[Varmap, ...]:
        """
        All varmaps of the deoptimization metadata: target first, then extra frames.

        Returns:
            tuple[Varmap, ...]: Varmaps in metadata order.
        """
        return (self.target.varmap, *(frame.varmap for frame in self.extra_frames))

    def map_metadata(self, fn: Callable[[Expr], Expr]) -> Assume:
        """
        Rewrite the varmap expressions of the target and of every extra frame, leaving predicates alone.

        Args:
            fn (Callable[[Expr], Expr]): Rewriting applied to each varmap expression.

        Returns:
            Assume: Rewritten assume.
        """
        target = dataclasses.replace(self.target, varmap=self.target.varmap.map_exprs(fn))
        frames = tuple(dataclasses.replace(frame, varmap=frame.varmap.map_exprs(fn)) for frame in self.extra_frames)
        return Assume(self.predicates, target, frames)


@dataclasses.dataclass(frozen=True, slots=True)
class Stop:
    """`stop`"""


type Instruction = (
    VarDecl | Drop | Assign | ArrayAlloc | ArrayLit | ArrayStore | Branch | Goto | Print | Read | Call | Return | Assume
    | Stop
)

DECLARING = (VarDecl, ArrayAlloc, ArrayLit, Call)
"""Instructions that add their variable to the scope."""


def declared_var(instr: Instruction) -> str | None:
    """
    Return the variable an instruction declares.

    Args:
        instr (Instruction): Instruction to inspect.

    Returns:
        str | None: Declared variable, or None.
    """
    match instr:
        case VarDecl(name, _) | ArrayAlloc(name, _) | ArrayLit(name, _) | Call(name, _, _):
            return name
        case _:
            return None


def written_var(instr: Instruction) -> str | None:
    """
    Return the variable whose value an instruction changes without declaring it.

    Args:
        instr (Instruction): Instruction to inspect.

    Returns:
        str | None: Updated variable, or None. Array stores change the heap, not the variable.
    """
    match instr:
        case Assign(name, _) | Read(name):
            return name
        case _:
            return None


def expressions(instr: Instruction) -> tuple[Expr, ...]:
    """
    Every expression position of an instruction, deoptimization metadata included.

    Args:
        instr (Instruction): Instruction to inspect.

    Returns:
        tuple[Expr, ...]: Expressions in syntactic order.
    """
    match instr:
        case VarDecl(_, expr) | Assign(_, expr) | Print(expr) | Return(expr):
            return (expr,)
        case ArrayAlloc(_, size):
            return (size,)
        case ArrayLit(_, elements):
            return elements
        case ArrayStore(_, index, value):
            return (index, value)
        case Branch(cond, _, _):
            return (cond,)
        case Call(_, callee, args):
            return (callee, *args)
        case Assume(predicates, _, _):
            return (*predicates, *(expr for varmap in instr.deopt_varmaps() for _, expr in varmap.bindings))
        case _:
            return ()


def used_vars(instr: Instruction) -> frozenset[str]:
    """
    Variables an instruction reads or requires to be in scope, deoptimization metadata included.

    Args:
        instr (Instruction): Instruction to inspect.

    Returns:
        frozenset[str]: Variable names.
    """
    names = frozenset().union(*(free_vars(expr) for expr in expressions(instr)))
    match instr:
        case Drop(name) | Assign(name, _) | Read(name) | ArrayStore(name, _, _):
            return names | {name}
        case _:
            return names


def referenced_functions(instr: Instruction) -> frozenset[str]:
    """
    Functions referenced by `&F` expressions of an instruction.

    Args:
        instr (Instruction): Instruction to inspect.

    Returns:
        frozenset[str]: Function names.
    """
    return frozenset().union(*(fun_refs(expr) for expr in expressions(instr)))


def map_expressions(instr: Instruction, fn: Callable[[Expr], Expr]) -> Instruction:
    """
    Rebuild an instruction with every expression position rewritten, deoptimization metadata included.

    Args:
        instr (Instruction): Instruction to rebuild.
        fn (Callable[[Expr], Expr]): Rewriting applied to each expression.

    Returns:
        Instruction: Rebuilt instruction.
    """
    match instr:
        case VarDecl(name, expr):
            return VarDecl(name, fn(expr))
        case Assign(name, expr):
            return Assign(name, fn(expr))
        case Print(expr):
            return Print(fn(expr))
        case Return(expr):
            return Return(fn(expr))
        case ArrayAlloc(name, size):
            return ArrayAlloc(name, fn(size))
        case ArrayLit(name, elements):
            return ArrayLit(name, tuple(fn(element) for element in elements))
        case ArrayStore(name, index, value):
            return ArrayStore(name, fn(index), fn(value))
        case Branch(cond, then_label, else_label):
            return Branch(fn(cond), then_label, else_label)
        case Call(name, callee, args):
            return Call(name, fn(callee), tuple(fn(arg) for arg in args))
        case Assume(predicates, _, _):
            return dataclasses.replace(instr.map_metadata(fn), predicates=tuple(fn(p) for p in predicates))
        case _:
            return instr


def rename_declared(instr: Instruction, renaming: dict[str, str]) -> Instruction:
    """
    Rename the variable an instruction names directly, outside of its expressions.

    Args:
        instr (Instruction): Instruction to rebuild.
        renaming (dict[str, str]): Old name to new name.

    Returns:
        Instruction: Rebuilt instruction.
    """
    match instr:
        case (
            VarDecl(name, _)
            | Assign(name, _)
            | ArrayAlloc(name, _)
            | ArrayLit(name, _)
            | ArrayStore(name, _, _)
            | Call(name, _, _)
            | Drop(name)
            | Read(name)
        ) if name in renaming:
            return dataclasses.replace(instr, name=renaming[name])
        case _:
            return instr


def jump_targets(instr: Instruction) -> tuple[str, ...]:
    """
    Labels an instruction jumps to explicitly.

    Args:
        instr (Instruction): Instruction to inspect.

    Returns:
        tuple[str, ...]: Jump target labels.
    """
    match instr:
        case Goto(label):
            return (label,)
        case Branch(_, then_label, else_label):
            return (then_label, else_label)
        case _:
            return ()


def retarget_jumps(instr: Instruction, old: str, new: str) -> Instruction:
    """
    Replace a jump target label.

    Args:
        instr (Instruction): Instruction to rebuild.
        old (str): Label to replace.
        new (str): Replacement label.

    Returns:
        Instruction: Rebuilt instruction.
    """
    match instr:
        case Goto(label) if label == old:
            return Goto(new)
        case Branch(cond, then_label, else_label) if old in {then_label, else_label}:
            return Branch(
                cond,
                new if then_label == old else then_label,
                new if else_label == old else else_label,
            )
        case _:
            return instr


def is_terminal(instr: Instruction) -> bool:
    """
    Check whether an instruction ends a control-flow path.

    Args:
        instr (Instruction): Instruction to check.

    Returns:
        bool: True for `return` and `stop`.
    """
    return isinstance(instr, Return | Stop)


def falls_through(instr: Instruction) -> bool:
    """
    Check whether control continues at the next label after the instruction.

    Args:
        instr (Instruction): Instruction to check.

    Returns:
        bool: False for jumps, `return` and `stop`.
    """
    return not isinstance(instr, Return | Stop | Goto | Branch)
