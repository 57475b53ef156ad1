from __future__ import annotations

from typing import TYPE_CHECKING

from sourir.text.printer import render_expr

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from sourir.equivalence.diff import DiffResult
    from sourir.ir.expressions import Literal
    from sourir.ir.program import Location


def render_diff(result: DiffResult) -> str:
    """
    Render a diff report: the verdict line followed by both runs.

    Args:
        result (DiffResult): Comparison to report.

    Returns:
        str: Report text.
    """
    return f"{result.summary()}\n== left\n{result.left.render()}== right\n{result.right.render()}"


def render_script(script: Sequence[Literal]) -> str:
    """
    Render an input script in the inline comma format.

    Args:
        script (Sequence[Literal]): Literals.

    Returns:
        str: Comma separated literals.
    """
    return ", ".join(render_expr(literal) for literal in script)


def render_sweep(results: Iterable[tuple[Location, DiffResult]]) -> str:
    """
    Render one verdict line per forced assume site.

    Args:
        results (Iterable[tuple[Location, DiffResult]]): Sweep results.

    Returns:
        str: Report text.
    """
    return "".join(f"{site}: {result.summary()}\n" for site, result in results)


def render_exhaustive(results: Iterable[tuple[Sequence[Literal], DiffResult]]) -> str:
    """
    Render one verdict line per input script.

    Args:
        results (Iterable[tuple[Sequence[Literal], DiffResult]]): Exhaustive diff results.

    Returns:
        str: Report text.
    """
    return "".join(f"[{render_script(script)}]: {result.summary()}\n" for script, result in results)
