"""Canonical expanded form of expressions.

An expression is expanded into a sum of monomials over *atoms*.  Atoms are
variables and everything that cannot be expanded further: ``sin``, ``cos``,
``exp`` and ``log`` applied to canonical arguments, and non-monomial
denominators.  Exponents are integers, negative ones included, so ``x/x``
and ``y^-1 * y^2`` cancel exactly.

For polynomial input the result is the expanded normal form with rational
coefficients, hence an identically vanishing polynomial always simplifies to
the literal ``0``.  Transcendental identities (``sin^2 + cos^2``) are not
recognised.

Monomials are printed in graded lexicographic order.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from .nodes import (
    CONST, COS, EXP, LOG, NEG, POW, PRODUCT, QUOTIENT, SIN, SUM, VAR,
    Const, Expr, IntPower, Product, Sum, Var,
)

Monomial = tuple  # tuple[tuple[Expr, int], ...] sorted by atom sort key


class ExprDomainError(ArithmeticError):
    """A value is undefined: division by zero, log of a non-positive number, overflow."""


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    merged = dict(a)
    for atom, e in b:
        s = merged.get(atom, 0) + e
        if s:
            merged[atom] = s
        else:
            del merged[atom]
    return tuple(sorted(merged.items(), key=lambda p: p[0].sort_key()))


def _mono_pow(m: Monomial, k: int) -> Monomial:
    return tuple((atom, e * k) for atom, e in m) if k else ()


def _mono_order(item) -> tuple:
    mono = item[0]
    degree = sum(e for _, e in mono)
    return (-degree, tuple((atom.sort_key(), -e) for atom, e in mono))


class Poly:
    """Sparse multivariate (Laurent) polynomial over atoms.

    ``terms`` maps monomials to non-zero coefficients (``Fraction`` or
    ``float``).  Instances are treated as immutable.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        self.terms = {m: c for m, c in (terms or {}).items() if c != 0}

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(): c})

    @classmethod
    def atom(cls, a: Expr, k: int = 1) -> "Poly":
        return cls({((a, k),): Fraction(1)})

    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls.atom(Var(name))

    def is_zero(self) -> bool:
        return not self.terms

    def constant_value(self):
        """The value if this is a constant polynomial, else None."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and () in self.terms:
            return self.terms[()]
        return None

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "Poly") -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.const(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s != 0:
                out[m] = s
            else:
                out.pop(m, None)
        p = Poly()
        p.terms = out
        return p

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        p = Poly()
        p.terms = {m: -c for m, c in self.terms.items()}
        return p

    def __sub__(self, other: "Poly") -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return Poly.const(other) - self

    def scale(self, c) -> "Poly":
        if c == 0:
            return Poly()
        p = Poly()
        p.terms = {m: v * c for m, v in self.terms.items()}
        return p

    def __mul__(self, other: "Poly") -> "Poly":
        if not isinstance(other, Poly):
            return self.scale(other)
        if len(other.terms) == 1 and () in other.terms:
            return self.scale(other.terms[()])
        if len(self.terms) == 1 and () in self.terms:
            return other.scale(self.terms[()])
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            return inverse(self) ** (-k)
        result = Poly.const(Fraction(1))
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def atoms(self) -> set:
        return {a for m in self.terms for a, _ in m}

    def variables(self) -> set:
        return {a.value for a in self.atoms() if a.kind == VAR}

    def is_polynomial(self) -> bool:
        """True when only variables with non-negative exponents occur."""
        return all(a.kind == VAR and e > 0 for m in self.terms for a, e in m)

    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.terms.values())

    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self.terms), default=0)

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=_mono_order)

    def diff(self, var: str) -> "Poly":
        out = Poly()
        for mono, c in self.terms.items():
            for i, (atom, e) in enumerate(mono):
                da = _diff_atom(atom, var)
                if da.is_zero():
                    continue
                rest = list(mono)
                if e == 1:
                    del rest[i]
                else:
                    rest[i] = (atom, e - 1)
                out = out + Poly({tuple(rest): c * e}) * da
        return out

    def coefficient(self, atom: Expr, k: int) -> "Poly":
        """Coefficient of ``atom^k`` (other atoms kept)."""
        out = {}
        for mono, c in self.terms.items():
            d = dict(mono)
            if d.get(atom, 0) == k:
                d.pop(atom, None)
                rest = tuple(sorted(d.items(), key=lambda p: p[0].sort_key()))
                out[rest] = out.get(rest, 0) + c
        return Poly(out)

    def to_expr(self) -> Expr:
        return from_poly(self)

    def __repr__(self):
        return f"Poly({from_poly(self)})"


def inverse(p: Poly) -> Poly:
    """Multiplicative inverse; non-monomials become a negative-power atom."""
    if not p.terms:
        raise ExprDomainError("division by zero")
    if len(p.terms) == 1:
        (mono, c), = p.terms.items()
        inv_c = 1 / c if isinstance(c, float) else Fraction(1) / c
        kept = tuple((a, -e) for a, e in mono if a.kind != SUM)
        out = Poly({kept: inv_c})
        for a, e in mono:
            if a.kind == SUM:
                # a denominator atom flips to a positive power and must be expanded again
                out = out * to_poly(a) ** (-e)
        return out
    lead = p.sorted_terms()[0][1]
    monic = p.scale(1 / lead if isinstance(lead, float) else Fraction(1) / lead)
    atom = from_poly(monic)
    c = 1 / lead if isinstance(lead, float) else Fraction(1) / lead
    return Poly({((atom, -1),): c})


def _fold_function(kind: str, arg: Expr):
    """Constant-fold a function of a constant, or return None."""
    if arg.kind != CONST:
        return None
    v = arg.value
    if isinstance(v, float):
        try:
            if kind == LOG and v <= 0:
                return None
            return Const({SIN: math.sin, COS: math.cos, EXP: math.exp, LOG: math.log}[kind](v))
        except (OverflowError, ValueError):
            return None
    if v == 0 and kind in (SIN, COS, EXP):
        return Const({SIN: 0, COS: 1, EXP: 1}[kind])
    if v == 1 and kind == LOG:
        return Const(0)
    return None


def to_poly(e: Expr) -> Poly:
    """Expand ``e`` into canonical polynomial form (cached on the node)."""
    if e._poly is not None:
        return e._poly
    k = e.kind
    if k == CONST:
        p = Poly.const(e.value)
    elif k == VAR:
        p = Poly.atom(e)
    elif k == SUM:
        p = Poly()
        for a in e.args:
            p = p + to_poly(a)
    elif k == PRODUCT:
        p = Poly.const(Fraction(1))
        for a in e.args:
            p = p * to_poly(a)
            if p.is_zero():
                break
    elif k == NEG:
        p = -to_poly(e.args[0])
    elif k == QUOTIENT:
        p = to_poly(e.args[0]) * inverse(to_poly(e.args[1]))
    elif k == POW:
        p = to_poly(e.args[0]) ** e.value
    else:
        arg = from_poly(to_poly(e.args[0]))
        folded = _fold_function(k, arg)
        p = to_poly(folded) if folded is not None else Poly.atom(Expr(k, (arg,)))
    e._poly = p
    return p


def from_poly(p: Poly) -> Expr:
    """Build the canonical expression tree of ``p``."""
    terms = []
    for mono, c in p.sorted_terms():
        factors = [a if e == 1 else IntPower(a, e) for a, e in mono]
        if not factors:
            terms.append(Const(c))
        elif c == 1 and not isinstance(c, float):
            terms.append(factors[0] if len(factors) == 1 else Product(*factors))
        else:
            terms.append(Product(Const(c), *factors))
    if not terms:
        out = Const(0)
    elif len(terms) == 1:
        out = terms[0]
    else:
        out = Sum(*terms)
    out._poly = p
    return out


def simplify(e: Expr) -> Expr:
    """Canonical form of ``e``; idempotent and deterministic."""
    return from_poly(to_poly(e))


@lru_cache(maxsize=None)
def _diff_atom(atom: Expr, var: str) -> Poly:
    k = atom.kind
    if k == VAR:
        return Poly.const(Fraction(1)) if atom.value == var else Poly()
    if k == SUM:
        return to_poly(atom).diff(var)
    u = atom.args[0]
    du = to_poly(u).diff(var)
    if du.is_zero():
        return Poly()
    if k == SIN:
        return to_poly(Expr(COS, (u,))) * du
    if k == COS:
        return -(to_poly(Expr(SIN, (u,))) * du)
    if k == EXP:
        return Poly.atom(atom) * du
    if k == LOG:
        return du * inverse(to_poly(u))
    raise TypeError(f"unexpected atom kind {k}")


def differentiate(e: Expr, var: str) -> Expr:
    """Exact partial derivative of ``e`` with respect to ``var``, simplified."""
    return from_poly(to_poly(e).diff(var))


def expand_sum(polys: Iterable[Poly]) -> Poly:
    out = Poly()
    for p in polys:
        out = out + p
    return out
