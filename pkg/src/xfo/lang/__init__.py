"""The XFO modeling language: lexer, parser, printer, compiler, macros."""

from .compiler import CompileResult, ModuleInfo, compile_modules, module_fingerprint
from .expand import ActivityFamily, expand_activity_family, register_family
from .parser import parse_module
from .printer import module_to_source

__all__ = [
    "ActivityFamily",
    "CompileResult",
    "ModuleInfo",
    "compile_modules",
    "expand_activity_family",
    "module_fingerprint",
    "module_to_source",
    "parse_module",
    "register_family",
]
