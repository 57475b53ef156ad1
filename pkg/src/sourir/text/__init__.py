__all__ = [
    "SourceFile",
    "parse",
    "parse_expression",
    "parse_inputs",
    "read_inputs",
    "render_expr",
    "render_instruction",
    "render_program",
    "render_varmap",
]

from .parser import parse, parse_expression, parse_inputs
from .printer import render_expr, render_instruction, render_program, render_varmap
from .source import SourceFile, read_inputs
