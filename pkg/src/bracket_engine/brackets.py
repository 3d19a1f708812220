"""Poisson, contact, Jacobi, Nambu and modified Nambu brackets.

All brackets work on the canonical polynomial form of their arguments and
return simplified :class:`ScalarField` values, so identities between them
can be certified by exact cancellation.

Conventions
-----------
* Poisson on R^{2m} with coordinates ordered (x_1..x_m, y_1..y_m):
  ``{f, g} = sum_i (d_{x_i} f d_{y_i} g - d_{y_i} f d_{x_i} g)``, so ``{x, y} = 1``.
* Nambu on R^n: the Jacobian determinant ``det[d_j f_i]``, optionally times a
  scalar density ``c(x)``.
* Modified Nambu on R^n, n + 1 arguments:
  ``[f_1..f_{n+1}] = sum_i (-1)^(i+1) f_i {f_1..^f_i..f_{n+1}}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Callable, Optional, Sequence

from .expr import Expr, Poly, ScalarField, as_expr, to_poly
from .vectorfield import VectorField


class BracketError(ValueError):
    """Arity or dimension mismatch."""


def _check_same_coords(fields: Sequence[ScalarField]) -> tuple[str, ...]:
    coords = fields[0].coords
    for f in fields[1:]:
        if f.coords != coords:
            raise BracketError(f"coordinate mismatch: {f.coords} vs {coords}")
    return coords


def determinant(rows: Sequence[Sequence[Poly]]) -> Poly:
    """Determinant of a square matrix of polynomials (Laplace expansion, memoised minors)."""
    n = len(rows)
    if n == 0:
        return Poly.const(1)

    @lru_cache(maxsize=None)
    def minor(row: int, cols: tuple) -> Poly:
        if row == n - 1:
            return rows[row][cols[0]]
        total = Poly()
        for pos, c in enumerate(cols):
            entry = rows[row][c]
            if entry.is_zero():
                continue
            sub = minor(row + 1, cols[:pos] + cols[pos + 1:])
            term = entry * sub
            total = total + term if pos % 2 == 0 else total - term
        return total

    return minor(0, tuple(range(n)))


def permutation_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def leibniz_determinant(rows: Sequence[Sequence[Poly]]) -> Poly:
    """Determinant by the explicit permutation sum; independent of :func:`determinant`."""
    n = len(rows)
    total = Poly()
    for perm in permutations(range(n)):
        term = Poly.const(permutation_sign(perm))
        for i, j in enumerate(perm):
            term = term * rows[i][j]
        total = total + term
    return total


# --- Poisson --------------------------------------------------------------

def poisson(f: ScalarField, g: ScalarField) -> ScalarField:
    coords = _check_same_coords([f, g])
    n = len(coords)
    if n % 2:
        raise BracketError(f"Poisson bracket needs an even dimension, got {n}")
    m = n // 2
    fp, gp = f.poly, g.poly
    total = Poly()
    for i in range(m):
        q, p = coords[i], coords[i + m]
        total = total + fp.diff(q) * gp.diff(p) - fp.diff(p) * gp.diff(q)
    return ScalarField.from_poly(total, coords)


# --- contact --------------------------------------------------------------

def _euler_term(h: Poly, coords: Sequence[str], n: int) -> Poly:
    total = Poly()
    for i in range(2 * n):
        total = total + Poly.var(coords[i]) * h.diff(coords[i])
    return total


def contact_candidate(inside_f: bool, inside_g: bool) -> Callable[[ScalarField, ScalarField], ScalarField]:
    """One reading of the contact bracket's ambiguous grouping.

    ``inside_f`` puts the ``-2g`` term inside the group multiplied by
    ``d_{2n+1} f``; ``inside_g`` does the same for ``-2f`` and ``d_{2n+1} g``.
    """

    def bracket(f: ScalarField, g: ScalarField) -> ScalarField:
        coords = _check_same_coords([f, g])
        dim = len(coords)
        if dim % 2 == 0:
            raise BracketError(f"contact bracket needs an odd dimension, got {dim}")
        n = (dim - 1) // 2
        fp, gp = f.poly, g.poly
        total = Poly()
        for i in range(n):
            a, b = coords[i], coords[i + n]
            total = total + fp.diff(a) * gp.diff(b) - gp.diff(a) * fp.diff(b)
        last = coords[-1]
        dzf, dzg = fp.diff(last), gp.diff(last)
        if inside_f:
            total = total + dzf * (_euler_term(gp, coords, n) - gp.scale(2))
        else:
            total = total + dzf * _euler_term(gp, coords, n) - gp.scale(2)
        if inside_g:
            total = total - dzg * (_euler_term(fp, coords, n) - fp.scale(2))
        else:
            total = total - (dzg * _euler_term(fp, coords, n) - fp.scale(2))
        return ScalarField.from_poly(total, coords)

    bracket.__name__ = f"contact_{'in' if inside_f else 'out'}_{'in' if inside_g else 'out'}"
    return bracket


CONTACT_CANDIDATES = {
    (inside_f, inside_g): contact_candidate(inside_f, inside_g)
    for inside_f in (True, False) for inside_g in (True, False)
}

# the grouping that satisfies the Jacobi identity (see select_contact_grouping)
CONTACT_GROUPING = (True, True)
contact = CONTACT_CANDIDATES[CONTACT_GROUPING]
contact.__doc__ = """Contact bracket on R^{2n+1} in normal-form coordinates.

``{f,g} = sum_i (d_i f d_{i+n} g - d_i g d_{i+n} f)
          + d_{2n+1} f (sum_{i<=2n} x_i d_i g - 2g)
          - d_{2n+1} g (sum_{i<=2n} x_i d_i f - 2f)``
"""


def jacobi_residual(bracket, f: ScalarField, g: ScalarField, h: ScalarField) -> ScalarField:
    """{f,{g,h}} - {{f,g},h} - {g,{f,h}}."""
    return bracket(f, bracket(g, h)) - bracket(bracket(f, g), h) - bracket(g, bracket(f, h))


# --- Jacobi ---------------------------------------------------------------

@dataclass(frozen=True)
class JacobiStructure:
    """Bivector ``eta`` (n x n antisymmetric matrix) plus vector field ``E``."""

    eta: tuple[tuple[Expr, ...], ...]
    E: VectorField

    def __post_init__(self):
        eta = tuple(tuple(as_expr(v) for v in row) for row in self.eta)
        object.__setattr__(self, "eta", eta)
        n = self.E.dim
        if len(eta) != n or any(len(row) != n for row in eta):
            raise BracketError(f"eta must be {n} x {n}")
        for i in range(n):
            for j in range(i, n):
                if not (to_poly(eta[i][j]) + to_poly(eta[j][i])).is_zero():
                    raise BracketError(f"eta is not antisymmetric at ({i}, {j})")

    @property
    def coords(self) -> tuple[str, ...]:
        return self.E.coords

    @classmethod
    def symplectic(cls, coords: Sequence[str]) -> "JacobiStructure":
        """Canonical Poisson bivector, no E."""
        n = len(coords)
        if n % 2:
            raise BracketError("symplectic structure needs an even dimension")
        m = n // 2
        eta = [[0] * n for _ in range(n)]
        for i in range(m):
            eta[i][i + m] = 1
            eta[i + m][i] = -1
        return cls(tuple(map(tuple, eta)), VectorField.zero(coords))


def jacobi(f: ScalarField, g: ScalarField, s: JacobiStructure) -> ScalarField:
    """``{f,g}_J = eta(df, dg) + f E g - g E f``."""
    coords = _check_same_coords([f, g])
    if coords != s.coords:
        raise BracketError(f"structure lives on {s.coords}, fields on {coords}")
    df, dg = f.gradient(), g.gradient()
    total = Poly()
    for i, row in enumerate(s.eta):
        for j, v in enumerate(row):
            vp = to_poly(v)
            if not vp.is_zero():
                total = total + vp * df[i] * dg[j]
    ef = sum((p * d for p, d in zip(s.E.polys, df)), Poly())
    eg = sum((p * d for p, d in zip(s.E.polys, dg)), Poly())
    total = total + f.poly * eg - g.poly * ef
    return ScalarField.from_poly(total, coords)


# --- Nambu and modified Nambu ---------------------------------------------

@dataclass(frozen=True)
class NambuDensity:
    """Scalar multiplier c(x) of the standard n-vector."""

    c: ScalarField

    def __post_init__(self):
        if self.c.poly.is_zero():
            raise BracketError("density must not be identically zero")

    @property
    def dim(self) -> int:
        return self.c.dim


def nambu(fields: Sequence[ScalarField], density: Optional[NambuDensity] = None) -> ScalarField:
    """``c(x) * det[d_j f_i]`` on R^n with exactly n arguments."""
    fields = list(fields)
    if not fields:
        raise BracketError("no arguments")
    coords = _check_same_coords(fields)
    n = len(coords)
    if len(fields) != n:
        raise BracketError(f"Nambu bracket on R^{n} takes {n} arguments, got {len(fields)}")
    det = determinant([f.gradient() for f in fields])
    if density is not None:
        if density.c.coords != coords:
            raise BracketError("density lives on different coordinates")
        det = density.c.poly * det
    return ScalarField.from_poly(det, coords)


def modified_nambu(fields: Sequence[ScalarField]) -> ScalarField:
    """The (n+1)-ary alternating bracket ``sum_i (-1)^(i+1) f_i {..^f_i..}``."""
    fields = list(fields)
    if not fields:
        raise BracketError("no arguments")
    coords = _check_same_coords(fields)
    n = len(coords)
    if len(fields) != n + 1:
        raise BracketError(
            f"modified Nambu bracket on R^{n} takes {n + 1} arguments, got {len(fields)}")
    grads = [f.gradient() for f in fields]
    total = Poly()
    for i, f in enumerate(fields):
        fp = f.poly
        if fp.is_zero():
            continue
        minor = determinant(grads[:i] + grads[i + 1:])
        term = fp * minor
        total = total + term if i % 2 == 0 else total - term
    return ScalarField.from_poly(total, coords)


# registry used by the verification harness: id -> (callable on a list, arity(n))
BRACKETS = {
    "poisson": (lambda fs: poisson(*fs), lambda n: 2),
    "contact": (lambda fs: contact(*fs), lambda n: 2),
    "nambu": (lambda fs: nambu(fs), lambda n: n),
    "modified_nambu": (lambda fs: modified_nambu(fs), lambda n: n + 1),
}
