"""Vector fields on R^n with symbolic components."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .expr import Expr, Poly, ScalarField, as_expr, compile_numpy, from_poly, to_poly
from .expr.nodes import free_vars


@dataclass(frozen=True)
class VectorField:
    components: tuple[Expr, ...]
    coords: tuple[str, ...]

    def __post_init__(self):
        comps = tuple(as_expr(c) for c in self.components)
        coords = tuple(self.coords)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "coords", coords)
        if len(comps) != len(coords):
            raise ValueError(f"{len(comps)} components for {len(coords)} coordinates")
        for c in comps:
            extra = free_vars(c) - set(coords)
            if extra:
                raise ValueError(f"component uses undeclared coordinates {sorted(extra)}")

    @classmethod
    def from_polys(cls, polys: Sequence[Poly], coords: Sequence[str]) -> "VectorField":
        return cls(tuple(from_poly(p) for p in polys), tuple(coords))

    @classmethod
    def parse(cls, texts: Sequence[str], coords: Sequence[str]) -> "VectorField":
        return cls(tuple(ScalarField.parse(t, coords).expr for t in texts), tuple(coords))

    @classmethod
    def zero(cls, coords: Sequence[str]) -> "VectorField":
        return cls(tuple(as_expr(0) for _ in coords), tuple(coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def polys(self) -> list[Poly]:
        return [to_poly(c) for c in self.components]

    def component(self, i: int) -> ScalarField:
        return ScalarField(self.components[i], self.coords)

    def apply(self, f: ScalarField) -> ScalarField:
        """Directional derivative V f = sum_i V^i d_i f."""
        if f.coords != self.coords:
            raise ValueError(f"coordinate mismatch: {f.coords} vs {self.coords}")
        fp = f.poly
        total = Poly()
        for comp, name in zip(self.polys, self.coords):
            if comp.is_zero():
                continue
            total = total + comp * fp.diff(name)
        return ScalarField.from_poly(total, self.coords)

    def divergence(self) -> ScalarField:
        total = Poly()
        for comp, name in zip(self.polys, self.coords):
            total = total + comp.diff(name)
        return ScalarField.from_poly(total, self.coords)

    def simplify(self) -> "VectorField":
        return VectorField.from_polys(self.polys, self.coords)

    def __add__(self, other: "VectorField") -> "VectorField":
        if other.coords != self.coords:
            raise ValueError("coordinate mismatch")
        return VectorField.from_polys(
            [a + b for a, b in zip(self.polys, other.polys)], self.coords)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + other.scaled(-1)

    def scaled(self, factor) -> "VectorField":
        """Pointwise product with a scalar field or a number."""
        fp = factor.poly if isinstance(factor, ScalarField) else Poly.const(factor)
        return VectorField.from_polys([fp * p for p in self.polys], self.coords)

    def evaluate(self, point) -> tuple[float, ...]:
        return tuple(self.component(i).evaluate(point) for i in range(self.dim))

    def compile(self):
        """Vectorised evaluator: array (..., n) -> array (..., n)."""
        fns = [compile_numpy(c, self.coords) for c in self.components]

        def run(points: np.ndarray) -> np.ndarray:
            return np.stack([fn(points) for fn in fns], axis=-1)

        return run

    def __str__(self):
        parts = [f"({c})*d_{name}" for c, name in zip(self.components, self.coords)
                 if not to_poly(c).is_zero()]
        return " + ".join(parts) if parts else "0"
