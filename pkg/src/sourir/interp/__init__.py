__all__ = [
    "DEFAULT_FUEL",
    "MAX_ARRAY_LENGTH",
    "Action",
    "Address",
    "Configuration",
    "Continuation",
    "ExecutionObserver",
    "ForcePolicy",
    "FrameOrigin",
    "FunValue",
    "Heap",
    "InputCursor",
    "Outcome",
    "OutcomeKind",
    "PrintAction",
    "ReadAction",
    "RunResult",
    "StopAction",
    "Trace",
    "Value",
    "apply_primop",
    "deoptimize",
    "eval_expr",
    "eval_simple",
    "eval_varmap",
    "render_action",
    "render_trace",
    "run",
    "run_forcing_deopt",
    "step",
]

from .evaluation import apply_primop, eval_expr, eval_simple, eval_varmap
from .machine import Configuration, Continuation, ForcePolicy, FrameOrigin, InputCursor, deoptimize, step
from .runner import DEFAULT_FUEL, ExecutionObserver, Outcome, OutcomeKind, RunResult, run, run_forcing_deopt
from .trace import Action, PrintAction, ReadAction, StopAction, Trace, render_action, render_trace
from .values import MAX_ARRAY_LENGTH, Address, FunValue, Heap, Value
