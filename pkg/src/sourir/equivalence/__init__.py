__all__ = [
    "DiffResult",
    "EnumeratedPlan",
    "ExplicitPlan",
    "IInputPlan",
    "InputPlanBase",
    "Verdict",
    "check_transparency",
    "compare_runs",
    "diff_programs",
    "diff_versions",
    "driver_harness",
    "exhaustive_diff",
    "render_diff",
    "render_exhaustive",
    "render_script",
    "render_sweep",
    "sweep_transparency",
    "version_pair",
    "with_harness",
]

from .diff import (
    DiffResult,
    Verdict,
    check_transparency,
    compare_runs,
    diff_programs,
    diff_versions,
    sweep_transparency,
    version_pair,
)
from .harness import driver_harness, with_harness
from .plans import EnumeratedPlan, ExplicitPlan, IInputPlan, InputPlanBase, exhaustive_diff
from .report import render_diff, render_exhaustive, render_script, render_sweep
