"""The mapping-DSL front-end: parser, validator, printer, and evaluator."""

from .ast import MapperProgram, to_source
from .interp import Evaluator, MappingFunction, ProcRef, compile_mapper, eval_mapping
from .parser import parse
from .validate import Diagnostic, errors_of, validate

__all__ = [
    "Diagnostic",
    "Evaluator",
    "MapperProgram",
    "MappingFunction",
    "ProcRef",
    "compile_mapper",
    "errors_of",
    "eval_mapping",
    "parse",
    "to_source",
    "validate",
]
