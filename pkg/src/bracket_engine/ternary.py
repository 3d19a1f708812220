"""Ternary products on matrices and a deformed triple product of functions on R^2."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Callable, Union

import numpy as np

from .brackets import permutation_sign
from .expr import Poly, ScalarField, Var, from_poly, substitute, to_poly


def as_square_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("matrix entries must be finite")
    return m


def _same_size(*mats) -> list[np.ndarray]:
    out = [as_square_matrix(m) for m in mats]
    if len({m.shape for m in out}) != 1:
        raise ValueError(f"size mismatch: {[m.shape for m in out]}")
    return out


def alternating_triple(a1, a2, a3) -> np.ndarray:
    """Signed sum of the six products ``A_p(1) A_p(2) A_p(3)``."""
    mats = _same_size(a1, a2, a3)
    total = np.zeros_like(mats[0])
    for perm in permutations(range(3)):
        total += permutation_sign(perm) * (mats[perm[0]] @ mats[perm[1]] @ mats[perm[2]])
    return total


def _commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


RHO = {
    "trace": lambda m: float(np.trace(m)),
    "entry": lambda m: float(m[0, 0]),
}


def rho_ternary(a1, a2, a3, rho: Union[str, Callable[[np.ndarray], float]] = "trace") -> np.ndarray:
    """``rho(A1)[A2,A3] + rho(A2)[A3,A1] + rho(A3)[A1,A2]``.

    ``rho`` is "trace", "entry" (the (1,1) entry) or any linear functional.
    """
    m1, m2, m3 = _same_size(a1, a2, a3)
    if isinstance(rho, str):
        try:
            rho = RHO[rho]
        except KeyError:
            raise ValueError(f"unknown functional {rho!r}; expected one of {sorted(RHO)}") from None
    return (rho(m1) * _commutator(m2, m3) + rho(m2) * _commutator(m3, m1)
            + rho(m3) * _commutator(m1, m2))


# --- deformed triple product ----------------------------------------------

@dataclass(frozen=True)
class DeformedProductConfig:
    """Truncation order K of exp(hD); ``h`` is a number or the name of a symbol."""

    order: int
    h: Union[int, float, Fraction, str] = "h"

    def __post_init__(self):
        if not isinstance(self.order, int) or self.order < 0:
            raise ValueError(f"order must be a non-negative integer, got {self.order!r}")


def _slot(name: str, i: int) -> str:
    return f"{name}_{i}"


def _apply_D(F: Poly, x: str, y: str) -> Poly:
    """One application of D on the three-slot ring."""
    total = Poly()
    for a, b in ((1, 2), (2, 3), (1, 3)):
        xa, ya, xb, yb = _slot(x, a), _slot(y, a), _slot(x, b), _slot(y, b)
        total = total + F.diff(xa).diff(yb) - F.diff(ya).diff(xb)
    return total


def deformed_poly(e: Poly, f: Poly, g: Poly, x: str, y: str, order: int, h: Poly) -> Poly:
    """``sum_{k<=order} h^k/k! D^k (e (x) f (x) g)`` restricted to the diagonal.

    Atoms other than ``x`` and ``y`` (for example a symbolic ``h``) are
    treated as constants.
    """
    slots = []
    for i, u in enumerate((e, f, g), start=1):
        renamed = substitute(from_poly(u), {x: Var(_slot(x, i)), y: Var(_slot(y, i))})
        slots.append(to_poly(renamed))
    term = slots[0] * slots[1] * slots[2]
    total = Poly()
    for k in range(order + 1):
        if term.is_zero():
            break
        total = total + (h ** k) * term.scale(Fraction(1, math.factorial(k)))
        term = _apply_D(term, x, y)
    diag = {_slot(x, i): Var(x) for i in (1, 2, 3)}
    diag.update({_slot(y, i): Var(y) for i in (1, 2, 3)})
    return to_poly(substitute(from_poly(total), diag))


def deformed_triple(e: ScalarField, f: ScalarField, g: ScalarField,
                    cfg: DeformedProductConfig) -> ScalarField:
    """Diagonal restriction of ``exp(hD)(e (x) f (x) g)`` truncated at order K.

    With a symbolic ``h`` the result lives on the coordinates ``(x, y, h)``.
    """
    coords = e.coords
    if f.coords != coords or g.coords != coords or len(coords) != 2:
        raise ValueError("deformed_triple needs three fields on the same R^2")
    for u in (e, f, g):
        if not u.poly.is_polynomial():
            raise ValueError(f"non-polynomial input: {u}")
    x, y = coords
    out_coords = coords
    if isinstance(cfg.h, str):
        if cfg.h in coords:
            raise ValueError(f"parameter name {cfg.h!r} clashes with a coordinate")
        out_coords = coords + (cfg.h,)
        hp = Poly.var(cfg.h)
    else:
        hp = Poly.const(cfg.h)
    return ScalarField.from_poly(deformed_poly(e.poly, f.poly, g.poly, x, y, cfg.order, hp),
                                 out_coords)
