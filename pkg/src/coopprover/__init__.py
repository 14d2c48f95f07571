"""Cooperating tableau and saturation provers with clause exchange."""

from .kernel import App, Clause, Literal, Var
from .problems import ParseError, Problem, parse_problem, serialize_problem

__all__ = [
    "App",
    "Clause",
    "Literal",
    "Var",
    "ParseError",
    "Problem",
    "parse_problem",
    "serialize_problem",
]
