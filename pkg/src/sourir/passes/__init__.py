__all__ = [
    "PASSES",
    "AbstractEnv",
    "Const",
    "IPass",
    "NotConst",
    "PassBase",
    "PassInvocation",
    "PassRegistry",
    "PassReport",
    "Unknown",
    "analyze_constants",
    "available_predicates",
    "compose_assume",
    "constant_propagate",
    "create_version",
    "default_registry",
    "discard_version",
    "fold_branches",
    "fold_expr",
    "hoist_predicate",
    "inject_predicate",
    "inline",
    "insert_assume",
    "move_assume",
    "parse_pipeline",
    "remove_dead_vars",
    "remove_trivial_assume",
    "remove_unreachable",
    "render_pipeline",
    "run_pipeline",
    "snapshot_var",
]

from .base import IPass, PassBase, PassRegistry, PassReport
from .cleanup import fold_branches, remove_dead_vars, remove_unreachable
from .compose import compose_assume
from .constprop import AbstractEnv, Const, NotConst, Unknown, analyze_constants, constant_propagate, fold_expr
from .hoist import available_predicates, hoist_predicate
from .inline import inline
from .motion import move_assume, snapshot_var
from .pipeline import PASSES, PassInvocation, default_registry, parse_pipeline, render_pipeline, run_pipeline
from .versioning import create_version, discard_version, inject_predicate, insert_assume, remove_trivial_assume
