"""Symbolic expression core: parsing, canonical forms, derivatives, evaluation."""
from .evaluate import compile_numpy, evaluate
from .fields import (
    CERTIFIED_ZERO, NONZERO, NUMERICALLY_ZERO, Point, ScalarField, ZeroCheck,
    as_point, default_coords, is_zero,
)
from .nodes import (
    ONE, ZERO, Const, Cos, Exp, Expr, IntPower, Log, Neg, Product, Quotient,
    Root, Sin, Sum, Var, as_expr, free_vars, substitute, to_text,
)
from .parser import ExprError, ExprSyntaxError, UnknownIdentifierError, parse
from .poly import ExprDomainError, Poly, differentiate, from_poly, simplify, to_poly

__all__ = [
    "CERTIFIED_ZERO", "NONZERO", "NUMERICALLY_ZERO", "ONE", "ZERO",
    "Const", "Cos", "Exp", "Expr", "ExprDomainError", "ExprError",
    "ExprSyntaxError", "IntPower", "Log", "Neg", "Point", "Poly", "Product",
    "Quotient", "Root", "ScalarField", "Sin", "Sum", "UnknownIdentifierError",
    "Var", "ZeroCheck", "as_expr", "as_point", "compile_numpy",
    "default_coords", "differentiate", "evaluate", "free_vars", "from_poly",
    "is_zero", "parse", "simplify", "substitute", "to_poly", "to_text",
]
