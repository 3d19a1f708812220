"""Extended phase spaces that turn modified Nambu dynamics into ordinary Nambu dynamics.

Two lifts are provided.

* ``extend_to_k`` adds a fiber coordinate ``k > 0``.  The operator
  ``T = L + H`` on R^n becomes the vector field ``T^(k) = L + n H k d_k``,
  which is divergence free and is generated, as a Nambu flow on R^(n+1), by
  ``h_i = H_i (n k)^(1/n)``.  ``pullback_to_l`` rewrites the same picture in
  the coordinate ``l = k^(1/n)``, where the fiber component is ``H l d_l``.
* ``modified_from_extension`` lifts functions to one-homogeneous functions
  ``y f`` and recovers the modified bracket as a weighted Nambu bracket on
  R^(n+1) restricted to ``y = 1``.

Orientation: fiber coordinates are appended after the base coordinates.
With that ordering the Nambu tensors of both lifts carry the sign ``(-1)^n``
(it is the same as putting the fiber derivative first).

The module also evaluates the cyclic cocycle ``tau(f_0..f_n) = int f_0 df_1
^ ... ^ df_n`` on the torus.  Integrating by parts gives
``int [f_0, ..., f_n] dvol = (n + 1) tau``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .brackets import (
    BracketError, NambuDensity, _check_same_coords, determinant, modified_nambu, nambu,
)
from .dynamics import GeneratorT, modified_generator
from .expr import (
    Const, Poly, Root, ScalarField, Var, as_expr, compile_numpy, from_poly,
    substitute, to_poly,
)
from .vectorfield import VectorField


def fresh_name(base: str, taken: Sequence[str]) -> str:
    """``base`` if unused, otherwise ``base1``, ``base2``, ..."""
    if base not in taken:
        return base
    i = 1
    while f"{base}{i}" in taken:
        i += 1
    return f"{base}{i}"


def _orientation(n: int) -> int:
    return -1 if n % 2 else 1


@dataclass(frozen=True)
class ExtendedGenerator:
    """``L + (fiber component) d_fiber`` on R^n x R_+.

    ``hamiltonians`` and ``density`` describe the same vector field as a
    Nambu flow on the extended space.
    """

    base: GeneratorT
    fiber: str
    fiber_component: object
    hamiltonians: tuple[ScalarField, ...] = ()
    density: Optional[NambuDensity] = None

    def __post_init__(self):
        object.__setattr__(self, "fiber_component", as_expr(self.fiber_component))
        if self.fiber in self.base.coords:
            raise ValueError(f"fiber coordinate {self.fiber!r} clashes with the base")

    @property
    def coords(self) -> tuple[str, ...]:
        return self.base.coords + (self.fiber,)

    @property
    def n(self) -> int:
        return self.base.dim

    def vector_field(self) -> VectorField:
        return VectorField(self.base.L.components + (self.fiber_component,), self.coords)

    def divergence(self) -> ScalarField:
        return self.vector_field().divergence()

    def apply(self, F: ScalarField) -> ScalarField:
        """``T^(fiber) F`` for a function of the extended coordinates."""
        return self.vector_field().apply(F)

    def nambu_bracket(self, F: ScalarField) -> ScalarField:
        """``{h_1, ..., h_n, F}`` with the stored extended Hamiltonians and density."""
        if not self.hamiltonians:
            raise ValueError("no extended Hamiltonians attached")
        return nambu(list(self.hamiltonians) + [F], self.density)

    def embedding_residual(self, F: ScalarField, points) -> float:
        """Largest ``|{h_1..h_n, F} - T F|`` over the given extended points."""
        diff = self.nambu_bracket(F) - self.apply(F)
        fn = compile_numpy(diff.expr, self.coords)
        vals = fn(np.atleast_2d(np.asarray(points, dtype=float)))
        return float(np.max(np.abs(vals)))


def extend_to_k(hamiltonians: Sequence[ScalarField], fiber: str = "k") -> tuple[ExtendedGenerator, list[ScalarField]]:
    """Lift the modified dynamics of ``H_1..H_n`` to a Nambu flow on R^n x R_+.

    Returns ``T^(k) = L + n H k d_k`` and ``h_i = H_i (n k)^(1/n)``.
    """
    T = modified_generator(hamiltonians)
    n = T.dim
    fiber = fresh_name(fiber, T.coords)
    coords = T.coords + (fiber,)
    k = Var(fiber)
    root = Root(Const(n) * k, n)
    hs = [ScalarField(h.expr * root, coords) for h in T.hamiltonians]
    component = from_poly(T.H.poly * Poly.var(fiber).scale(n))
    density = NambuDensity(ScalarField.constant(_orientation(n), coords))
    ext = ExtendedGenerator(T, fiber, component, tuple(hs), density)
    return ext, hs


class LForm(NamedTuple):
    volume_density: ScalarField       # n l^(n-1)
    hamiltonians: list[ScalarField]   # n^(1/n) l H_i
    density: NambuDensity             # (-1)^n (1/n) l^(1-n)
    generator: ExtendedGenerator      # L + H l d_l


def pullback_to_l(ext: ExtendedGenerator, fiber: str = "l") -> LForm:
    """Rewrite a k-form extension in the coordinate ``l = k^(1/n)``."""
    T = ext.base
    n = T.dim
    if not T.hamiltonians:
        raise ValueError("the extension must come from extend_to_k")
    fiber = fresh_name(fiber, T.coords)
    coords = T.coords + (fiber,)
    l = Poly.var(fiber)
    volume = ScalarField.from_poly((l ** (n - 1)).scale(n), coords)
    scale = Root(Const(n), n)
    hs = [ScalarField(scale * Var(fiber) * h.expr, coords) for h in T.hamiltonians]
    c = ScalarField.from_poly((l ** (1 - n)).scale(Fraction(_orientation(n), n)), coords)
    density = NambuDensity(c)
    gen = ExtendedGenerator(T, fiber, from_poly(T.H.poly * l), tuple(hs), density)
    return LForm(volume, hs, density, gen)


# --- one-homogeneous extension --------------------------------------------

@dataclass(frozen=True)
class HomogeneousExtension:
    """Lift of R^n functions to ``y f`` on R^n x R_+, with tensor density ``(-1)^n y^(1-n)``."""

    base_coords: tuple[str, ...]
    fiber: str = "y"

    def __post_init__(self):
        base = tuple(self.base_coords)
        object.__setattr__(self, "base_coords", base)
        object.__setattr__(self, "fiber", fresh_name(self.fiber, base))

    @property
    def dim(self) -> int:
        return len(self.base_coords)

    @property
    def coords(self) -> tuple[str, ...]:
        return self.base_coords + (self.fiber,)

    def lift(self, f: ScalarField) -> ScalarField:
        if f.coords != self.base_coords:
            raise BracketError(f"coordinate mismatch: {f.coords} vs {self.base_coords}")
        return ScalarField.from_poly(Poly.var(self.fiber) * f.poly, self.coords)

    def density(self) -> NambuDensity:
        n = self.dim
        c = (Poly.var(self.fiber) ** (1 - n)).scale(_orientation(n))
        return NambuDensity(ScalarField.from_poly(c, self.coords))

    def bracket(self, fields: Sequence[ScalarField]) -> ScalarField:
        """The weighted Nambu bracket of the lifted fields on R^(n+1)."""
        return nambu([self.lift(f) for f in fields], self.density())

    def restrict(self, F: ScalarField, value=1) -> ScalarField:
        """Set the fiber coordinate to ``value``."""
        e = substitute(F.expr, {self.fiber: as_expr(value)})
        return ScalarField.from_poly(to_poly(e), self.base_coords)

    def scaled(self, F: ScalarField, lam) -> ScalarField:
        """``F(x, lam y)``."""
        e = substitute(F.expr, {self.fiber: as_expr(lam) * Var(self.fiber)})
        return ScalarField.from_poly(to_poly(e), self.coords)


def modified_from_extension(fields: Sequence[ScalarField]) -> ScalarField:
    """The modified bracket computed through the one-homogeneous lift."""
    fields = list(fields)
    if not fields:
        raise BracketError("no arguments")
    coords = _check_same_coords(fields)
    n = len(coords)
    if len(fields) != n + 1:
        raise BracketError(f"expected {n + 1} fields on R^{n}, got {len(fields)}")
    ext = HomogeneousExtension(coords)
    return ext.restrict(ext.bracket(fields))


# --- cyclic cocycle -------------------------------------------------------

class CocycleValues(NamedTuple):
    tau: float
    bracket_integral: float   # (1/(n+1)) int [f_0..f_n] dvol, equal to tau
    raw_integral: float       # int [f_0..f_n] dvol

    def scaled_integral(self, factor) -> float:
        return float(factor) * self.raw_integral


def _torus_grid(n: int, grid: int) -> np.ndarray:
    axis = 2 * math.pi * np.arange(grid) / grid
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def cyclic_cocycle(fields: Sequence[ScalarField], grid: int = 64) -> CocycleValues:
    """``tau`` and the integrated modified bracket on the torus [0, 2 pi)^n.

    Both integrals use the rectangle rule on a uniform periodic grid, which
    is exact up to rounding for trigonometric polynomials of degree below
    ``grid / 2``.  Periodicity of the inputs is the caller's responsibility.
    """
    fields = list(fields)
    if grid < 16:
        raise ValueError(f"grid must be at least 16 points per axis, got {grid}")
    if not fields:
        raise BracketError("no arguments")
    coords = _check_same_coords(fields)
    n = len(coords)
    if len(fields) != n + 1:
        raise BracketError(f"expected {n + 1} fields on the {n}-torus, got {len(fields)}")
    pts = _torus_grid(n, grid)
    cell = (2 * math.pi / grid) ** n

    def integral(poly: Poly) -> float:
        vals = compile_numpy(from_poly(poly), coords)(pts)
        return float(np.sum(np.broadcast_to(vals, pts.shape[:1])) * cell)

    jac = determinant([f.gradient() for f in fields[1:]])
    tau = integral(fields[0].poly * jac)
    raw = integral(modified_nambu(fields).poly)
    return CocycleValues(tau, raw / (n + 1), raw)
