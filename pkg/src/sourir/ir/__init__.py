__all__ = [
    "FALSE",
    "INT_MAX",
    "INT_MIN",
    "MAIN",
    "NIL",
    "TRUE",
    "ArrayAlloc",
    "ArrayLit",
    "ArrayRead",
    "ArrayStore",
    "Assign",
    "Assume",
    "BoolLit",
    "Branch",
    "Call",
    "DeoptTarget",
    "Drop",
    "Expr",
    "ExtraFrame",
    "FunRef",
    "Function",
    "Goto",
    "Instruction",
    "InstructionStream",
    "IntLit",
    "Length",
    "Literal",
    "Location",
    "NameSupply",
    "NilLit",
    "Op",
    "Primop",
    "Print",
    "Program",
    "Read",
    "Return",
    "SimpleExpr",
    "Stop",
    "Var",
    "VarDecl",
    "Varmap",
    "Version",
    "free_vars",
    "fresh_name",
    "is_literal",
    "is_simple",
    "same_modulo_labels",
]

from .compare import same_modulo_labels
from .expressions import (
    FALSE,
    INT_MAX,
    INT_MIN,
    NIL,
    TRUE,
    ArrayRead,
    BoolLit,
    Expr,
    FunRef,
    IntLit,
    Length,
    Literal,
    NilLit,
    Op,
    Primop,
    SimpleExpr,
    Var,
    free_vars,
    is_literal,
    is_simple,
)
from .instructions import (
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
    Instruction,
    Print,
    Read,
    Return,
    Stop,
    VarDecl,
    Varmap,
)
from .names import NameSupply, fresh_name
from .program import MAIN, Function, InstructionStream, Location, Program, Version
