from __future__ import annotations

__all__ = ["Diagnostic", "DiagnosticCode", "check_program", "render_diagnostics"]

import dataclasses
import enum
from typing import TYPE_CHECKING

from sourir.analysis.scope import scope_at
from sourir.errors import ScopeMismatchError
from sourir.ir.instructions import (
    Assume,
    Stop,
    declared_var,
    falls_through,
    jump_targets,
    referenced_functions,
    used_vars,
)
from sourir.ir.program import MAIN, Location

if TYPE_CHECKING:
    from collections.abc import Iterator

    from sourir.analysis.scope import ScopeMap
    from sourir.ir.program import Function, InstructionStream, Program


class DiagnosticCode(enum.StrEnum):
    """Closed set of well-formedness violations."""

    MISSING_MAIN = "MissingMain"
    MAIN_HAS_PARAMS = "MainHasParams"
    MAIN_MISSING_STOP = "MainMissingStop"
    DUPLICATE_DECL = "DuplicateDecl"
    UNKNOWN_FUNCTION = "UnknownFunction"
    SCOPE_MISMATCH = "ScopeMismatch"
    UNBOUND_VARIABLE = "UnboundVariable"
    BAD_DEOPT_TARGET = "BadDeoptTarget"
    VARMAP_SCOPE_MISMATCH = "VarmapScopeMismatch"
    FALL_THROUGH_END = "FallThroughEnd"
    UNKNOWN_LABEL = "UnknownLabel"


@dataclasses.dataclass(frozen=True, slots=True)
class Diagnostic:
    """A single well-formedness violation."""

    location: Location | None
    """Instruction the violation is attached to; None for program-level problems."""
    code: DiagnosticCode
    message: str

    def render(self, file: str | None = None) -> str:
        """
        Render the diagnostic as `file:F.V.L: CODE: message`.

        Args:
            file (str | None): Source file name prefix. Omitted when None.

        Returns:
            str: One-line rendering.
        """
        where = str(self.location) if self.location is not None else "program"
        prefix = f"{file}:" if file else ""
        return f"{prefix}{where}: {self.code}: {self.message}"


def render_diagnostics(diagnostics: list[Diagnostic], file: str | None = None) -> str:
    """
    Render diagnostics one per line.

    Args:
        diagnostics (list[Diagnostic]): Diagnostics in reporting order.
        file (str | None): Source file name prefix.

    Returns:
        str: Rendered lines, each terminated by a newline.
    """
    return "".join(f"{diagnostic.render(file)}\n" for diagnostic in diagnostics)


def check_program(program: Program) -> list[Diagnostic]:
    """
    Check the well-formedness requirements of a program.

    Diagnostics are reported per function and version in program order, and in stream order within a version.

    Args:
        program (Program): Program to check.

    Returns:
        list[Diagnostic]: Violations; empty when the program is well-formed.
    """
    diagnostics: list[Diagnostic] = []
    if not program.has_function(MAIN):
        diagnostics.append(Diagnostic(None, DiagnosticCode.MISSING_MAIN, "the program has no 'main' function"))
    elif program.function(MAIN).params:
        location = Location(MAIN, program.function(MAIN).active.label, program.function(MAIN).active.instrs.entry)
        diagnostics.append(Diagnostic(location, DiagnosticCode.MAIN_HAS_PARAMS, "'main' must not take parameters"))
    for function in program:
        for version in function.versions:
            diagnostics.extend(_check_version(program, function, version.label, version.instrs))
    return diagnostics


def _check_version(
    program: Program,
    function: Function,
    version: str,
    instrs: InstructionStream,
) -> Iterator[Diagnostic]:
    def at(label: str, code: DiagnosticCode, message: str) -> Diagnostic:
        return Diagnostic(Location(function.name, version, label), code, message)

    if not len(instrs):
        yield Diagnostic(Location(function.name, version, ""), DiagnosticCode.FALL_THROUGH_END, "version is empty")
        return

    scopes: ScopeMap | None
    try:
        scopes = scope_at(program, function.name, version)
    except ScopeMismatchError as e:
        scopes = None
        yield at(e.label, DiagnosticCode.SCOPE_MISMATCH, str(e))

    declared: set[str] = set(function.params)
    last_label, last_instr = instrs.instrs[-1]
    for label, instr in instrs:
        if (name := declared_var(instr)) is not None:
            if name in declared:
                yield at(label, DiagnosticCode.DUPLICATE_DECL, f"variable {name!r} is declared twice in the stream")
            declared.add(name)
        for callee in sorted(referenced_functions(instr)):
            if not program.has_function(callee):
                yield at(label, DiagnosticCode.UNKNOWN_FUNCTION, f"function {callee!r} is not defined")
        for target in jump_targets(instr):
            if target not in instrs:
                yield at(label, DiagnosticCode.UNKNOWN_LABEL, f"label {target!r} is not in the stream")
        if scopes is not None and label in scopes:
            unbound = used_vars(instr) - scopes[label]
            if unbound:
                yield at(label, DiagnosticCode.UNBOUND_VARIABLE, f"variables {sorted(unbound)!r} are not in scope")
        if isinstance(instr, Assume):
            yield from _check_assume(program, Location(function.name, version, label), instr)

    if falls_through(last_instr):
        yield at(last_label, DiagnosticCode.FALL_THROUGH_END, "the last instruction falls through the end")
    if function.name == MAIN and not isinstance(last_instr, Stop):
        yield at(last_label, DiagnosticCode.MAIN_MISSING_STOP, "every version of 'main' must end with 'stop'")


def _check_assume(program: Program, site: Location, assume: Assume) -> Iterator[Diagnostic]:
    metadata: list[tuple[str, str, str, tuple[str, ...], str | None]] = [
        (assume.target.function, assume.target.version, assume.target.label, assume.target.varmap.names, None),
    ]
    metadata.extend(
        (frame.function, frame.version, frame.label, frame.varmap.names, frame.ret_var) for frame in assume.extra_frames
    )
    for function, version, label, names, ret_var in metadata:
        where = f"{function}.{version}.{label}"
        if not program.has_function(function) or not program.function(function).has_version(version):
            yield Diagnostic(site, DiagnosticCode.BAD_DEOPT_TARGET, f"deoptimization target {where} does not exist")
            continue
        if label not in program.stream(function, version):
            yield Diagnostic(site, DiagnosticCode.BAD_DEOPT_TARGET, f"deoptimization target {where} does not exist")
            continue
        try:
            expected = scope_at(program, function, version).get(label)
        except ScopeMismatchError:
            continue
        installed = frozenset(names) | ({ret_var} if ret_var is not None else frozenset())
        if expected is not None and installed != expected:
            message = (
                f"metadata for {where} installs {{{', '.join(sorted(installed))}}} "
                f"but the scope there is {{{', '.join(sorted(expected))}}}"
            )
            yield Diagnostic(site, DiagnosticCode.VARMAP_SCOPE_MISMATCH, message)
