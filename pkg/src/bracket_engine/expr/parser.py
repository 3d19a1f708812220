"""Recursive-descent parser for the infix expression grammar.

Grammar (lowest to highest binding)::

    sum     := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' exponent)?
    exponent:= ['-' | '+'] INT | '(' ['-' | '+'] INT ')'
    atom    := NUMBER | NAME | FUNC '(' sum ')' | '(' sum ')'

Plain integers and decimals become exact rationals; a literal written with
an exponent marker (``1e-3``, ``0.5e0``) is a float.  A quotient of two
exact literals (``2/3``) and a negated literal are read as single constants,
so printed rationals parse back to the same tree.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .nodes import (
    CONST, FUNCTIONS, Const, Expr, IntPower, Neg, Product, Quotient, Sum, Var,
)


class ExprError(ValueError):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprError):
    def __init__(self, token: str, offset: int):
        super().__init__(f"unknown identifier {token!r} at offset {offset}")
        self.token = token
        self.offset = offset


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "number" | "name" | "op" | "end"
    text: str
    offset: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), _byte_offset(text, pos)))
        pos = m.end()
    tokens.append(Token("end", "", _byte_offset(text, len(text))))
    return tokens


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def parse_number(text: str):
    if "e" in text or "E" in text:
        return float(text)
    return Fraction(text)


class _Parser:
    def __init__(self, text: str, coords: Optional[Iterable[str]]):
        self.tokens = tokenize(text)
        self.pos = 0
        self.coords = None if coords is None else set(coords)

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def error(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        what = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError(f"{message}, found {what}", tok.offset)

    def expect(self, text: str):
        if self.tok.kind == "op" and self.tok.text == text:
            return self.advance()
        self.error(f"expected {text!r}")

    def parse(self) -> Expr:
        e = self.sum()
        if self.tok.kind != "end":
            self.error("unexpected token")
        return e

    def sum(self) -> Expr:
        terms = [self.term()]
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            t = self.term()
            terms.append(t if op == "+" else Neg(t))
        return terms[0] if len(terms) == 1 else Sum(*terms)

    def term(self) -> Expr:
        factors = [self.unary()]
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            rhs = self.unary()
            if op == "*":
                factors.append(rhs)
            else:
                num = factors[0] if len(factors) == 1 else Product(*factors)
                factors = [_divide(num, rhs)]
        return factors[0] if len(factors) == 1 else Product(*factors)

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            operand = self.unary()
            if operand.kind == CONST:
                return Const(-operand.value)
            return Neg(operand)
        if self.tok.kind == "op" and self.tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            base = IntPower(base, self.exponent())
        return base

    def exponent(self) -> int:
        paren = self.tok.kind == "op" and self.tok.text == "("
        if paren:
            self.advance()
        sign = 1
        if self.tok.kind == "op" and self.tok.text in "+-":
            sign = -1 if self.advance().text == "-" else 1
        tok = self.tok
        if tok.kind != "number" or not tok.text.isdigit():
            self.error("exponent must be an integer literal")
        self.advance()
        if paren:
            self.expect(")")
        return sign * int(tok.text)

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "number":
            self.advance()
            return Const(parse_number(tok.text))
        if tok.kind == "name":
            self.advance()
            if tok.text in FUNCTIONS:
                if not (self.tok.kind == "op" and self.tok.text == "("):
                    self.error(f"expected '(' after {tok.text}")
                self.advance()
                arg = self.sum()
                self.expect(")")
                return Expr(tok.text, (arg,))
            if self.coords is not None and tok.text not in self.coords:
                raise UnknownIdentifierError(tok.text, tok.offset)
            return Var(tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            e = self.sum()
            self.expect(")")
            return e
        self.error("expected a number, name or '('")


def _divide(num: Expr, den: Expr) -> Expr:
    """``a/b`` of two exact literals is the rational literal; anything else is a quotient."""
    if (num.kind == CONST and den.kind == CONST and isinstance(num.value, Fraction)
            and isinstance(den.value, Fraction) and den.value != 0):
        return Const(num.value / den.value)
    return Quotient(num, den)


def parse(text: str, coords: Optional[Iterable[str]] = None) -> Expr:
    """Parse ``text`` into a raw (unsimplified) expression tree.

    When ``coords`` is given, every identifier other than a function name
    must be one of them; otherwise :class:`UnknownIdentifierError` is raised.
    """
    return _Parser(text, coords).parse()
