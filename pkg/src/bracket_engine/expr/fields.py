"""Scalar fields on R^n and the zero-testing oracle behind every identity check."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import math

from .evaluate import compile_numpy, evaluate
from .nodes import Expr, as_expr, free_vars, natural_key
from .parser import parse
from .poly import ExprDomainError, Poly, from_poly, to_poly

CERTIFIED_ZERO = "certified-zero"
NUMERICALLY_ZERO = "numerically-zero"
NONZERO = "nonzero"

SAMPLE_BOX = (-2.0, 2.0)
SINGULAR_MARGIN = 1e-3
ZERO_TOL = 1e-9

Point = tuple


def as_point(values: Iterable[float], dim: int) -> Point:
    p = tuple(float(v) for v in values)
    if len(p) != dim:
        raise ValueError(f"point has {len(p)} coordinates, expected {dim}")
    if not all(math.isfinite(v) for v in p):
        raise ValueError("point coordinates must be finite")
    return p


def default_coords(n: int) -> tuple[str, ...]:
    if n <= 3:
        return ("x", "y", "z")[:n]
    return tuple(f"x{i}" for i in range(1, n + 1))


@dataclass(frozen=True)
class ZeroCheck:
    verdict: str
    max_abs: float = 0.0
    witness: Optional[Point] = None
    samples: int = 0

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED_ZERO

    @property
    def zero(self) -> bool:
        return self.verdict != NONZERO


def _singular_vars(p: Poly) -> set[str]:
    out = set()
    for mono in p.terms:
        for atom, e in mono:
            if atom.kind == "var" and e < 0:
                out.add(atom.value)
    return out


def is_zero(
    e: Expr,
    trials: int = 20,
    coords: Optional[Sequence[str]] = None,
    seed: int = 0,
    box: Optional[Mapping[str, tuple[float, float]]] = None,
    avoid_zero: Iterable[str] = (),
    tol: float = ZERO_TOL,
) -> ZeroCheck:
    """Decide whether ``e`` vanishes identically.

    Exact cancellation in the canonical form gives a certified zero.  Otherwise
    ``trials`` points are drawn from [-2, 2]^n (per-coordinate ``box``
    overrides allowed), skipping points within 1e-3 of a zero of any variable
    in ``avoid_zero`` or of a variable raised to a negative power, and points
    where evaluation fails.  The witness is the sample with the largest
    absolute value.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = to_poly(e)
    if p.is_zero():
        return ZeroCheck(CERTIFIED_ZERO)
    expr = from_poly(p)
    if coords is None:
        coords = sorted(free_vars(expr), key=natural_key)
    coords = tuple(coords)
    avoid = set(avoid_zero) | _singular_vars(p)
    box = dict(box or {})
    rng = random.Random(seed)

    best, witness, used, attempts = -1.0, None, 0, 0
    while used < trials:
        attempts += 1
        if attempts > 100 * trials:
            raise ExprDomainError("could not find evaluable sample points")
        pt = []
        for name in coords:
            lo, hi = box.get(name, SAMPLE_BOX)
            pt.append(rng.uniform(lo, hi))
        if any(abs(v) < SINGULAR_MARGIN for name, v in zip(coords, pt) if name in avoid):
            continue
        try:
            val = abs(evaluate(expr, pt, coords))
        except ExprDomainError:
            continue
        used += 1
        if val > best:
            best, witness = val, tuple(pt)
    verdict = NUMERICALLY_ZERO if best < tol else NONZERO
    return ZeroCheck(verdict, best, witness, used)


def _coerce(value, coords) -> "ScalarField":
    if isinstance(value, ScalarField):
        if value.coords != coords:
            raise ValueError(f"coordinate mismatch: {value.coords} vs {coords}")
        return value
    return ScalarField(as_expr(value), coords)


@dataclass(frozen=True)
class ScalarField:
    """An expression on R^n with named coordinates."""

    expr: Expr
    coords: tuple[str, ...]

    def __post_init__(self):
        coords = tuple(self.coords)
        object.__setattr__(self, "coords", coords)
        if len(set(coords)) != len(coords):
            raise ValueError(f"duplicate coordinate names in {coords}")
        if not coords:
            raise ValueError("a field needs at least one coordinate")
        extra = free_vars(self.expr) - set(coords)
        if extra:
            raise ValueError(f"expression uses undeclared coordinates {sorted(extra)}")

    @classmethod
    def parse(cls, text: str, coords: Sequence[str]) -> "ScalarField":
        return cls(parse(text, coords), tuple(coords))

    @classmethod
    def from_poly(cls, p: Poly, coords: Sequence[str]) -> "ScalarField":
        return cls(from_poly(p), tuple(coords))

    @classmethod
    def constant(cls, c, coords: Sequence[str]) -> "ScalarField":
        return cls(as_expr(c), tuple(coords))

    @classmethod
    def coordinate(cls, name: str, coords: Sequence[str]) -> "ScalarField":
        return cls.parse(name, coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def poly(self) -> Poly:
        return to_poly(self.expr)

    def simplify(self) -> "ScalarField":
        return ScalarField(from_poly(self.poly), self.coords)

    def diff(self, var: str) -> "ScalarField":
        if var not in self.coords:
            raise ValueError(f"unknown variable {var!r}")
        return ScalarField.from_poly(self.poly.diff(var), self.coords)

    def gradient(self) -> list[Poly]:
        return [self.poly.diff(c) for c in self.coords]

    def evaluate(self, point) -> float:
        return evaluate(self.expr, point, self.coords)

    def compile(self):
        return compile_numpy(self.expr, self.coords)

    def is_zero(self, trials: int = 20, seed: int = 0, **kwargs) -> ZeroCheck:
        return is_zero(self.expr, trials, self.coords, seed, **kwargs)

    def with_coords(self, coords: Sequence[str]) -> "ScalarField":
        return ScalarField(self.expr, tuple(coords))

    def __add__(self, other):
        other = _coerce(other, self.coords)
        return ScalarField.from_poly(self.poly + other.poly, self.coords)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other, self.coords)
        return ScalarField.from_poly(self.poly - other.poly, self.coords)

    def __rsub__(self, other):
        return _coerce(other, self.coords) - self

    def __mul__(self, other):
        other = _coerce(other, self.coords)
        return ScalarField.from_poly(self.poly * other.poly, self.coords)

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField.from_poly(-self.poly, self.coords)

    def __str__(self):
        return str(self.expr)
