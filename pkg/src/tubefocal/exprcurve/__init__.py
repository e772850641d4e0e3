"""Expression parsing, jet evaluation and the finite-difference oracle."""

from .curve import CurveDef
from .expr import (
    ExprSyntaxError,
    ExpressionError,
    Node,
    UnknownIdentifier,
    diff,
    eval_jet,
    eval_jet3,
    evaluate,
    parse_expr,
    to_text,
)
from .fd import fd_jet3, richardson_derivatives
from .jet import DomainError, Jet, Jet3

__all__ = [
    "CurveDef",
    "DomainError",
    "ExprSyntaxError",
    "ExpressionError",
    "Jet",
    "Jet3",
    "Node",
    "UnknownIdentifier",
    "diff",
    "eval_jet",
    "eval_jet3",
    "evaluate",
    "fd_jet3",
    "parse_expr",
    "richardson_derivatives",
    "to_text",
]
