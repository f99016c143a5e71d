"""The ``.dym`` modeling language: parsing, checking and lowering."""

from .ast import Diagnostic, ModelAST
from .compile import CompileError, ExecutablePlan, compile_model
from .parser import ParseError, parse
from .printer import format_model
from .validate import validate

compile = compile_model

__all__ = [
    "CompileError", "Diagnostic", "ExecutablePlan", "ModelAST", "ParseError",
    "compile", "compile_model", "format_model", "parse", "validate",
]
