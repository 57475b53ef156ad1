"""
Programs transcribed from worked examples of speculative optimization, shipped as package data.

Each `<name>.sourir` file is a well-formed program with a `main`; `<name>.pipeline` files hold the pass pipelines
that derive the optimized versions from the matching base programs.
"""

from __future__ import annotations

__all__ = ["fixture_names", "fixture_text", "load_fixture", "load_pipeline"]

from importlib import resources
from typing import TYPE_CHECKING

from sourir.passes.pipeline import parse_pipeline
from sourir.text.parser import parse

if TYPE_CHECKING:
    from sourir.ir.program import Program
    from sourir.passes.pipeline import PassInvocation

_SUFFIX = ".sourir"


def fixture_names() -> list[str]:
    """
    Names of the shipped programs, without suffix.

    Returns:
        list[str]: Sorted fixture names.
    """
    files = resources.files(__name__).iterdir()
    return sorted(entry.name.removesuffix(_SUFFIX) for entry in files if entry.name.endswith(_SUFFIX))


def fixture_text(file_name: str) -> str:
    """
    Raw text of a shipped file.

    Args:
        file_name (str): File name with suffix, e.g. `fig5.pipeline`.

    Returns:
        str: File content.

    Raises:
        FileNotFoundError: If no such file is shipped.
    """
    return resources.files(__name__).joinpath(file_name).read_text(encoding="utf-8")


def load_fixture(name: str) -> Program:
    """
    Parse a shipped program.

    Args:
        name (str): Fixture name without suffix, e.g. `fig8`.

    Returns:
        Program: Parsed program.
    """
    return parse(fixture_text(f"{name}{_SUFFIX}"))


def load_pipeline(name: str) -> list[PassInvocation]:
    """
    Parse a shipped pipeline.

    Args:
        name (str): Pipeline name without suffix, e.g. `fig5`.

    Returns:
        list[PassInvocation]: Stages.
    """
    return parse_pipeline(fixture_text(f"{name}.pipeline"))
