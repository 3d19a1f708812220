"""Immutable expression trees and the infix printer.

Every node is an :class:`Expr`; the capitalised helpers (``Const``, ``Var``,
``Sum`` ...) are the public constructors.  Trees are never mutated after
construction, so they can be shared freely between threads.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Union

CONST = "const"
VAR = "var"
SUM = "sum"
PRODUCT = "product"
QUOTIENT = "quotient"
POW = "pow"
NEG = "neg"
SIN = "sin"
COS = "cos"
EXP = "exp"
LOG = "log"

FUNCTIONS = (SIN, COS, EXP, LOG)

_KIND_RANK = {
    CONST: 0, VAR: 1, SIN: 2, COS: 3, EXP: 4, LOG: 5,
    SUM: 6, PRODUCT: 7, QUOTIENT: 8, POW: 9, NEG: 10,
}

Number = Union[int, Fraction, float]


class Expr:
    """A node of a symbolic expression tree.

    ``kind`` is one of the module-level kind names, ``args`` holds the child
    nodes and ``value`` the payload: the number for constants, the name for
    variables and the integer exponent for powers.
    """

    __slots__ = ("kind", "args", "value", "_hash", "_key", "_poly")

    def __init__(self, kind: str, args: tuple = (), value=None):
        self.kind = kind
        self.args = args
        self.value = value
        self._hash = hash((kind, _value_id(kind, value), args))
        self._key = None
        self._poly = None

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr) or self._hash != other._hash:
            return False
        return (
            self.kind == other.kind
            and _value_id(self.kind, self.value) == _value_id(other.kind, other.value)
            and self.args == other.args
        )

    def __repr__(self):
        if self.kind == CONST:
            return f"Const({self.value!r})"
        if self.kind == VAR:
            return f"Var({self.value!r})"
        if self.kind == POW:
            return f"IntPower({self.args[0]!r}, {self.value})"
        inner = ", ".join(repr(a) for a in self.args)
        return f"{self.kind.capitalize()}({inner})"

    def __str__(self):
        return to_text(self)

    def sort_key(self) -> tuple:
        """Total structural order used for canonical forms."""
        if self._key is None:
            if self.kind == CONST:
                v = self.value
                vk = (0, v) if isinstance(v, Fraction) else (1, v)
            elif self.kind == VAR:
                vk = natural_key(self.value)
            elif self.kind == POW:
                vk = self.value
            else:
                vk = 0
            key = (_KIND_RANK[self.kind], vk, tuple(a.sort_key() for a in self.args))
            self._key = key
        return self._key

    @property
    def is_const(self) -> bool:
        return self.kind == CONST

    # arithmetic sugar; builds raw (unsimplified) trees

    def __add__(self, other):
        return Sum(self, as_expr(other))

    def __radd__(self, other):
        return Sum(as_expr(other), self)

    def __sub__(self, other):
        return Sum(self, Neg(as_expr(other)))

    def __rsub__(self, other):
        return Sum(as_expr(other), Neg(self))

    def __mul__(self, other):
        return Product(self, as_expr(other))

    def __rmul__(self, other):
        return Product(as_expr(other), self)

    def __truediv__(self, other):
        return Quotient(self, as_expr(other))

    def __rtruediv__(self, other):
        return Quotient(as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, k):
        if not isinstance(k, int) or isinstance(k, bool):
            raise TypeError("only integer exponents are supported")
        return IntPower(self, k)


def _value_id(kind, value):
    # Fraction(1) == 1.0 in Python; constants of different exactness must differ
    if kind == CONST:
        return (type(value) is float, value)
    return value


def natural_key(name: str) -> tuple:
    parts = re.split(r"(\d+)", name)
    return tuple((1, int(p)) if p.isdigit() else (0, p) for p in parts if p)


def _normalize_number(v) -> Number:
    if isinstance(v, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError(f"non-finite constant {v!r}")
        return v
    raise TypeError(f"cannot make a constant from {type(v).__name__}")


_VAR_CACHE: dict[str, Expr] = {}


def Const(v: Number) -> Expr:
    return Expr(CONST, (), _normalize_number(v))


def Var(name: str) -> Expr:
    node = _VAR_CACHE.get(name)
    if node is None:
        node = _VAR_CACHE.setdefault(name, Expr(VAR, (), name))
    return node


def Sum(*terms: Expr) -> Expr:
    if not terms:
        return ZERO
    return Expr(SUM, tuple(as_expr(t) for t in terms))


def Product(*factors: Expr) -> Expr:
    if not factors:
        return ONE
    return Expr(PRODUCT, tuple(as_expr(f) for f in factors))


def Quotient(num: Expr, den: Expr) -> Expr:
    return Expr(QUOTIENT, (as_expr(num), as_expr(den)))


def IntPower(base: Expr, k: int) -> Expr:
    if not isinstance(k, int) or isinstance(k, bool):
        raise TypeError("exponent must be an int")
    return Expr(POW, (as_expr(base),), k)


def Neg(a: Expr) -> Expr:
    return Expr(NEG, (as_expr(a),))


def Sin(a: Expr) -> Expr:
    return Expr(SIN, (as_expr(a),))


def Cos(a: Expr) -> Expr:
    return Expr(COS, (as_expr(a),))


def Exp(a: Expr) -> Expr:
    return Expr(EXP, (as_expr(a),))


def Log(a: Expr) -> Expr:
    return Expr(LOG, (as_expr(a),))


def Root(a: Expr, n: int) -> Expr:
    """Positive real n-th root of ``a``, written as exp(log(a)/n)."""
    return Exp(Quotient(Log(a), Const(n)))


ZERO = Const(0)
ONE = Const(1)


def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    return Const(v)


def free_vars(e: Expr) -> frozenset[str]:
    if e.kind == VAR:
        return frozenset((e.value,))
    out: frozenset[str] = frozenset()
    for a in e.args:
        out |= free_vars(a)
    return out


def substitute(e: Expr, mapping: dict) -> Expr:
    """Replace variables by expressions (or numbers); no simplification."""
    if e.kind == VAR:
        return as_expr(mapping[e.value]) if e.value in mapping else e
    if not e.args:
        return e
    new_args = tuple(substitute(a, mapping) for a in e.args)
    if new_args == e.args:
        return e
    return Expr(e.kind, new_args, e.value)


def node_count(e: Expr) -> int:
    return 1 + sum(node_count(a) for a in e.args)


# --- printing -------------------------------------------------------------

_P_SUM, _P_PROD, _P_NEG, _P_POW, _P_ATOM = 1, 2, 3, 4, 5


def format_number(v: Number) -> str:
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return f"{v.numerator}/{v.denominator}"
    text = repr(float(v))
    if "e" not in text:
        # exponent marker keeps float literals from re-parsing as exact rationals
        text += "e0"
    return text


def _precedence(e: Expr) -> int:
    k = e.kind
    if k == CONST:
        v = e.value
        if v < 0:
            return _P_NEG
        if isinstance(v, Fraction) and v.denominator != 1:
            return _P_PROD
        return _P_ATOM
    if k in (VAR, SIN, COS, EXP, LOG):
        return _P_ATOM
    if k == SUM:
        return _P_SUM
    if k in (PRODUCT, QUOTIENT):
        return _P_PROD
    if k == NEG:
        return _P_NEG
    return _P_POW


def _wrap(e: Expr, min_prec: int) -> str:
    text = to_text(e)
    if _precedence(e) < min_prec:
        return f"({text})"
    return text


def _negated(term: Expr):
    """If ``term`` prints with a leading minus, return its positive part."""
    if term.kind == NEG:
        return term.args[0]
    if term.kind == CONST and term.value < 0:
        return Const(-term.value)
    if term.kind == PRODUCT and term.args[0].kind == CONST and term.args[0].value < 0:
        c = -term.args[0].value
        rest = term.args[1:]
        if c == 1:
            return rest[0] if len(rest) == 1 else Product(*rest)
        return Product(Const(c), *rest)
    return None


def to_text(e: Expr) -> str:
    """Render ``e`` in the grammar accepted by :func:`parse`."""
    k = e.kind
    if k == CONST:
        return format_number(e.value)
    if k == VAR:
        return e.value
    if k == SUM:
        out = [_wrap(e.args[0], _P_PROD)]
        for t in e.args[1:]:
            pos = _negated(t)
            if pos is not None:
                out.append(" - " + _wrap(pos, _P_PROD))
            else:
                out.append(" + " + _wrap(t, _P_PROD))
        return "".join(out)
    if k == PRODUCT:
        first, rest = e.args[0], e.args[1:]
        if first.kind == CONST and first.value == -1 and rest:
            if len(rest) == 1:
                return "-" + _wrap(rest[0], _P_POW)
            return "-" + "*".join([_wrap(rest[0], _P_POW)] + [_wrap(f, _P_POW) for f in rest[1:]])
        parts = [_wrap(first, _P_NEG)] + [_wrap(f, _P_POW) for f in rest]
        return "*".join(parts)
    if k == QUOTIENT:
        return _wrap(e.args[0], _P_PROD) + "/" + _wrap(e.args[1], _P_POW)
    if k == NEG:
        return "-" + _wrap(e.args[0], _P_POW)
    if k == POW:
        exp_text = str(e.value) if e.value >= 0 else f"({e.value})"
        return _wrap(e.args[0], _P_ATOM) + "^" + exp_text
    return f"{k}({to_text(e.args[0])})"


def iter_nodes(e: Expr) -> Iterable[Expr]:
    yield e
    for a in e.args:
        yield from iter_nodes(a)
