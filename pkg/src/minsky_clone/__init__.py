"""Minsky machine encodings into a finite algebra and tools for its subpowers."""

from .algebra import Algebra, build_algebra
from .minsky import MinskyMachine, normalize, parse_machine, run, run_within
from .subpower import Relation, classify, generate, sequential_relation

__version__ = "0.1.0"

__all__ = [
    "Algebra", "MinskyMachine", "Relation", "build_algebra", "classify", "generate",
    "normalize", "parse_machine", "run", "run_within", "sequential_relation",
]
