"""Observable actions and their text format."""

from __future__ import annotations

import dataclasses
from typing import TYPE_CHECKING

from sourir.text.printer import render_expr

if TYPE_CHECKING:
    from collections.abc import Iterable

    from sourir.ir.expressions import Literal


@dataclasses.dataclass(frozen=True, slots=True)
class ReadAction:
    """A literal consumed from the input script."""

    value: Literal


@dataclasses.dataclass(frozen=True, slots=True)
class PrintAction:
    """A literal printed by the program."""

    value: Literal


@dataclasses.dataclass(frozen=True, slots=True)
class StopAction:
    """Normal termination. Always the last action of a trace."""


type Action = ReadAction | PrintAction | StopAction

type Trace = tuple[Action, ...]


def render_action(action: Action | None) -> str:
    """
    Render an action as `read <lit>`, `print <lit>` or `stop`.

    Args:
        action (Action | None): Action to render; None stands for a missing action past the end of a trace.

    Returns:
        str: One-line rendering.
    """
    match action:
        case ReadAction(value):
            return f"read {render_expr(value)}"
        case PrintAction(value):
            return f"print {render_expr(value)}"
        case StopAction():
            return "stop"
        case None:
            return "<end>"


def render_trace(trace: Iterable[Action]) -> str:
    """
    Render a trace one action per line.

    Args:
        trace (Iterable[Action]): Actions in order.

    Returns:
        str: Rendered lines, each terminated by a newline.
    """
    return "".join(f"{render_action(action)}\n" for action in trace)
