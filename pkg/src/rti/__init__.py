"""Regular type inference for pure logic programs via set constraints."""

from .frontend import parse_atom, parse_program, prepare
from .report import classify, project
from .solver import SolveConfig, analyze, solve

__all__ = [
    "SolveConfig",
    "analyze",
    "classify",
    "parse_atom",
    "parse_program",
    "prepare",
    "project",
    "solve",
]
__version__ = "0.1.0"
