__all__ = [
    "Diagnostic",
    "DiagnosticCode",
    "ScopeMap",
    "check_program",
    "deopt_entry_labels",
    "render_diagnostics",
    "scope_at",
    "successors_within",
    "transfer_scope",
]

from .checker import Diagnostic, DiagnosticCode, check_program, render_diagnostics
from .scope import ScopeMap, deopt_entry_labels, scope_at, successors_within, transfer_scope
