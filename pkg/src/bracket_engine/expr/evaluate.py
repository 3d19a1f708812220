"""Numeric evaluation: single points (pure Python) and numpy batches."""
from __future__ import annotations

import math
from typing import Callable, Mapping, Sequence

import numpy as np

from .nodes import (
    CONST, COS, EXP, LOG, NEG, POW, PRODUCT, QUOTIENT, SIN, SUM, VAR, Expr,
)
from .poly import ExprDomainError


def _point_env(point, coords: Sequence[str] | None) -> Mapping[str, float]:
    if isinstance(point, Mapping):
        return {k: float(v) for k, v in point.items()}
    if coords is None:
        raise ValueError("coordinate names are required for a positional point")
    values = list(point)
    if len(values) != len(coords):
        raise ValueError(f"point has {len(values)} entries, expected {len(coords)}")
    for v in values:
        if not math.isfinite(v):
            raise ValueError("point entries must be finite")
    return dict(zip(coords, map(float, values)))


def evaluate(e: Expr, point, coords: Sequence[str] | None = None) -> float:
    """Evaluate ``e`` at a point given as a mapping or a sequence aligned with ``coords``.

    Raises ExprDomainError instead of ever returning NaN or infinity.
    """
    env = _point_env(point, coords)
    value = _eval(e, env)
    if not math.isfinite(value):
        raise ExprDomainError(f"non-finite value {value!r}")
    return value


def _eval(e: Expr, env: Mapping[str, float]) -> float:
    k = e.kind
    if k == CONST:
        return float(e.value)
    if k == VAR:
        try:
            return env[e.value]
        except KeyError:
            raise ValueError(f"no value for variable {e.value!r}") from None
    if k == SUM:
        return math.fsum(_eval(a, env) for a in e.args)
    if k == PRODUCT:
        out = 1.0
        for a in e.args:
            out *= _eval(a, env)
        return out
    if k == NEG:
        return -_eval(e.args[0], env)
    if k == QUOTIENT:
        den = _eval(e.args[1], env)
        if den == 0.0:
            raise ExprDomainError("division by zero")
        return _eval(e.args[0], env) / den
    if k == POW:
        base = _eval(e.args[0], env)
        if base == 0.0 and e.value < 0:
            raise ExprDomainError("division by zero")
        try:
            return base ** e.value
        except OverflowError:
            raise ExprDomainError("overflow") from None
    x = _eval(e.args[0], env)
    try:
        if k == SIN:
            return math.sin(x)
        if k == COS:
            return math.cos(x)
        if k == EXP:
            return math.exp(x)
        if k == LOG:
            if x <= 0.0:
                raise ExprDomainError(f"log of non-positive value {x!r}")
            return math.log(x)
    except OverflowError:
        raise ExprDomainError("overflow") from None
    raise TypeError(f"unknown node kind {k}")


def compile_numpy(e: Expr, coords: Sequence[str]) -> Callable[[np.ndarray], np.ndarray]:
    """Compile ``e`` into a vectorised function of an array of shape (..., n).

    Domain violations show up as NaN/inf in the output; callers decide what to
    do with them.
    """
    index = {name: i for i, name in enumerate(coords)}
    fn = _build(e, index)

    def run(points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        with np.errstate(all="ignore"):
            out = fn(points)
        return np.broadcast_to(out, points.shape[:-1]).astype(float, copy=True)

    return run


def _build(e: Expr, index: Mapping[str, int]):
    k = e.kind
    if k == CONST:
        v = float(e.value)
        return lambda X: v
    if k == VAR:
        if e.value not in index:
            raise ValueError(f"variable {e.value!r} is not a coordinate")
        i = index[e.value]
        return lambda X: X[..., i]
    kids = [_build(a, index) for a in e.args]
    if k == SUM:
        def f_sum(X):
            out = kids[0](X)
            for g in kids[1:]:
                out = out + g(X)
            return out
        return f_sum
    if k == PRODUCT:
        def f_prod(X):
            out = kids[0](X)
            for g in kids[1:]:
                out = out * g(X)
            return out
        return f_prod
    if k == NEG:
        g = kids[0]
        return lambda X: -g(X)
    if k == QUOTIENT:
        a, b = kids
        return lambda X: np.divide(a(X), b(X))
    if k == POW:
        g, p = kids[0], e.value
        if p >= 0:
            return lambda X: np.power(g(X), p)
        return lambda X: 1.0 / np.power(g(X), -p)
    g = kids[0]
    if k == SIN:
        return lambda X: np.sin(g(X))
    if k == COS:
        return lambda X: np.cos(g(X))
    if k == EXP:
        return lambda X: np.exp(g(X))
    if k == LOG:
        def f_log(X):
            v = g(X)
            return np.log(np.where(v > 0, v, np.nan))
        return f_log
    raise TypeError(f"unknown node kind {k}")

