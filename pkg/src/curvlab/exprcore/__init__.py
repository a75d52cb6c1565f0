"""Exact symbolic scalars: parsing, canonical form, calculus, evaluation."""

from .expr import (
    ONE,
    ZERO,
    EvaluationError,
    Expr,
    as_expr,
    cancel,
    canonicalize,
    cosh,
    differentiate,
    eval_numeric,
    exp,
    expr_sum,
    is_zero,
    sinh,
    sqrt_expr,
    substitute,
    symbol,
    to_text,
)
from .parser import ExprSyntaxError, Node, parse_expr

__all__ = [
    "ONE",
    "ZERO",
    "EvaluationError",
    "Expr",
    "ExprSyntaxError",
    "Node",
    "as_expr",
    "cancel",
    "canonicalize",
    "cosh",
    "differentiate",
    "eval_numeric",
    "exp",
    "expr_sum",
    "is_zero",
    "parse_expr",
    "sinh",
    "sqrt_expr",
    "substitute",
    "symbol",
    "to_text",
]


def parse(text: str) -> Expr:
    """Parse and canonicalize in one step."""
    return canonicalize(parse_expr(text))
