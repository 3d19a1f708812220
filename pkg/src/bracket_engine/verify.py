"""Seeded property checks for the bracket identities.

Every check returns a :class:`VerificationReport`.  Checks with polynomial
inputs are symbolic: they pass only when the residual cancels exactly in
the canonical form.  Flow and quadrature checks are sampled and compare the
largest residual with a tolerance that belongs to the check's registration.
"""
from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import brackets as br
from .dynamics import (
    GRAPH, PULLBACK, BlowUpError, GeneratorT, apply_generator,
    automorphism_from_vector_field, evolve_batch, integrate_flow, evolve_graph,
    modified_generator, nambu_vector_field, pullback_jet,
)
from .expr import (
    ExprDomainError, Poly, ScalarField, Var, compile_numpy,
    default_coords, from_poly,
)
from .extension import (
    HomogeneousExtension, cyclic_cocycle, extend_to_k, modified_from_extension,
)
from .ternary import deformed_poly
from .vectorfield import VectorField

SYMBOLIC = "symbolic"
SAMPLED = "sampled"
PASS = "pass"
FAIL = "fail"
INFORMATIONAL = "informational"

# expression growth makes symbolic FI checks expensive beyond these
MAX_FI_DIM = 3
MAX_FI_DEGREE = 3


@dataclass
class VerificationReport:
    name: str
    mode: str
    samples: int
    max_residual: float
    witness: Optional[tuple] = None
    verdict: str = PASS
    detail: str = ""
    covers: tuple = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["witness"] = list(self.witness) if self.witness is not None else None
        d["covers"] = list(self.covers)
        return d


@dataclass(frozen=True)
class RandomFieldSpec:
    dim: int = 2
    max_degree: int = 2
    coeff_range: tuple = (-3, 3)
    count: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1 or self.max_degree < 0 or self.count < 0:
            raise ValueError(f"invalid spec {self}")
        lo, hi = self.coeff_range
        if lo > hi:
            raise ValueError("empty coefficient range")

    @property
    def coords(self) -> tuple[str, ...]:
        return default_coords(self.dim)

    def rng(self, salt: str = "") -> random.Random:
        return random.Random(f"{self.seed}:{salt}")


def monomials(coords: Sequence[str], max_degree: int) -> list[Poly]:
    out = []
    for deg in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(coords, deg):
            m = Poly.const(1)
            for c in combo:
                m = m * Poly.var(c)
            out.append(m)
    return out


def random_polynomial(rng: random.Random, coords: Sequence[str], max_degree: int,
                      coeff_range=(-3, 3)) -> ScalarField:
    """Integer-coefficient polynomial of degree <= max_degree, never identically zero."""
    lo, hi = coeff_range
    while True:
        p = Poly()
        for m in monomials(coords, max_degree):
            p = p + m.scale(rng.randint(lo, hi))
        if not p.is_zero():
            return ScalarField.from_poly(p, coords)


def random_trig_polynomial(rng: random.Random, coords: Sequence[str], max_freq: int = 2,
                           terms: int = 3, coeff_range=(-3, 3)) -> ScalarField:
    """Sum of products of sin/cos of integer multiples of the coordinates."""
    lo, hi = coeff_range
    parts = []
    for _ in range(terms):
        c = rng.randint(lo, hi) or 1
        factors = [str(c)]
        for name in coords:
            k = rng.randint(0, max_freq)
            if k:
                factors.append(f"{rng.choice(('sin', 'cos'))}({k}*{name})")
        parts.append("*".join(factors))
    return ScalarField.parse(" + ".join(parts), coords)


def random_fields(spec: RandomFieldSpec, per_tuple: int, salt: str = "") -> list[list[ScalarField]]:
    rng = spec.rng(salt)
    return [[random_polynomial(rng, spec.coords, spec.max_degree, spec.coeff_range)
             for _ in range(per_tuple)] for _ in range(spec.count)]


# --- report helpers -------------------------------------------------------

def symbolic_report(name: str, residuals: Iterable[ScalarField], covers=(), detail: str = "",
                    seed: int = 0) -> VerificationReport:
    """Pass iff every residual cancels exactly; otherwise carry a sampled witness."""
    samples, worst, witness = 0, 0.0, None
    failed = False
    for r in residuals:
        samples += 1
        if r.poly.is_zero():
            continue
        failed = True
        try:
            check = r.is_zero(seed=seed)
        except ExprDomainError:
            continue
        if check.max_abs is not None and check.max_abs >= worst:
            worst, witness = check.max_abs, check.witness
    verdict = FAIL if failed else PASS
    if failed and witness is None:
        detail = (detail + "; " if detail else "") + "residual did not cancel; no evaluable witness"
    return VerificationReport(name, SYMBOLIC, samples, worst, witness, verdict, detail, tuple(covers))


def sampled_report(name: str, residuals: np.ndarray, points, tol: float, covers=(),
                   detail: str = "", informational: bool = False) -> VerificationReport:
    res = np.abs(np.asarray(residuals, dtype=float)).ravel()
    if res.size == 0:
        return VerificationReport(name, SAMPLED, 0, 0.0, None, PASS, detail, tuple(covers))
    i = int(np.argmax(res))
    worst = float(res[i])
    if informational:
        verdict = INFORMATIONAL
    else:
        verdict = PASS if worst < tol and np.isfinite(worst) else FAIL
    witness = tuple(float(v) for v in np.atleast_1d(points[i])) if verdict != PASS else None
    return VerificationReport(name, SAMPLED, int(res.size), worst, witness, verdict, detail, tuple(covers))


def _blowup_report(name: str, err: BlowUpError, covers=()) -> VerificationReport:
    return VerificationReport(name, SAMPLED, 0, math.inf, None, FAIL,
                              f"blow-up after t = {err.last_time!r}", tuple(covers))


def _bracket(bracket_id: str, override=None) -> Callable[[list], ScalarField]:
    if override is not None:
        return override
    try:
        return br.BRACKETS[bracket_id][0]
    except KeyError:
        raise ValueError(f"unknown bracket {bracket_id!r}; expected one of {sorted(br.BRACKETS)}") from None


def _arity(bracket_id: str, n: int) -> int:
    if bracket_id in br.BRACKETS:
        return br.BRACKETS[bracket_id][1](n)
    raise ValueError(f"unknown bracket {bracket_id!r}")


# --- algebraic checks -----------------------------------------------------

def check_antisymmetry(bracket_id: str, spec: RandomFieldSpec, bracket=None,
                       name: Optional[str] = None) -> VerificationReport:
    """B(..a, b..) + B(..b, a..) for every adjacent transposition."""
    B = _bracket(bracket_id, bracket)
    arity = _arity(bracket_id, spec.dim)

    def residuals():
        for fs in random_fields(spec, arity, "antisymmetry"):
            value = B(fs)
            for i in range(arity - 1):
                swapped = fs[:i] + [fs[i + 1], fs[i]] + fs[i + 2:]
                yield value + B(swapped)

    return symbolic_report(name or f"antisymmetry[{bracket_id}, n={spec.dim}]",
                           residuals(), covers=("antisymmetry",), seed=spec.seed)


def leibniz_counterexample() -> Fraction:
    """``[x, y, 1*1] - (1*[x, y, 1] + 1*[x, y, 1])`` for the modified bracket on R^2."""
    c = ("x", "y")
    x, y, one = (ScalarField.parse(t, c) for t in ("x", "y", "1"))
    lhs = br.modified_nambu([x, y, one * one])
    rhs = one * br.modified_nambu([x, y, one]) + one * br.modified_nambu([x, y, one])
    return (lhs - rhs).poly.constant_value()


def check_leibniz(bracket_id: str, spec: RandomFieldSpec, bracket=None) -> VerificationReport:
    """Leibniz rule in the last slot: B(.., g h) = g B(.., h) + h B(.., g)."""
    name = f"leibniz[{bracket_id}, n={spec.dim}]"
    if bracket_id == "modified_nambu" and bracket is None:
        r = leibniz_counterexample()
        return VerificationReport(
            name, SYMBOLIC, 1, abs(float(r)), (0.0, 0.0), INFORMATIONAL,
            f"Leibniz fails: [x,y,1*1] - (1*[x,y,1] + 1*[x,y,1]) = {r}",
            ("leibniz-failure",))
    B = _bracket(bracket_id, bracket)
    arity = _arity(bracket_id, spec.dim)

    def residuals():
        for fs in random_fields(spec, arity + 1, "leibniz"):
            head, g, h = fs[:arity - 1], fs[-2], fs[-1]
            yield B(head + [g * h]) - g * B(head + [h]) - h * B(head + [g])

    return symbolic_report(name, residuals(), covers=("leibniz",), seed=spec.seed)


def fi_residual(bracket_id: str, fixed: list, args: list, bracket=None) -> ScalarField:
    """``B(fixed, B(args)) - sum_i B(args with B(fixed, args_i) in slot i)``."""
    B = _bracket(bracket_id, bracket)
    lhs = B(fixed + [B(args)])
    total = lhs
    for i in range(len(args)):
        inner = B(fixed + [args[i]])
        total = total - B(args[:i] + [inner] + args[i + 1:])
    return total


def check_fi(bracket_id: str, spec: RandomFieldSpec, bracket=None,
             name: Optional[str] = None) -> VerificationReport:
    """Fundamental identity: fixing all but one slot gives a derivation of the bracket."""
    name = name or f"fi[{bracket_id}, n={spec.dim}]"
    covers = ("fundamental-identity",)
    if bracket_id == "deformed_triple":
        return check_fi_deformed(spec)
    if spec.dim > MAX_FI_DIM or spec.max_degree > MAX_FI_DEGREE:
        return VerificationReport(
            name, SYMBOLIC, 0, 0.0, None, INFORMATIONAL,
            f"resource cap exceeded: dim <= {MAX_FI_DIM} and degree <= {MAX_FI_DEGREE} supported",
            covers)
    arity = _arity(bracket_id, spec.dim)

    def residuals():
        for fs in random_fields(spec, 2 * arity - 1, "fi"):
            yield fi_residual(bracket_id, fs[:arity - 1], fs[arity - 1:], bracket)

    return symbolic_report(name, residuals(), covers=covers, seed=spec.seed)


def check_fi_deformed(spec: RandomFieldSpec, h: str = "h") -> VerificationReport:
    """Order-h FI residual of the K=1 deformed triple product (recorded, not judged)."""
    x, y = default_coords(2)
    hp = Poly.var(h)

    def P(a, b, c):
        return deformed_poly(a, b, c, x, y, 1, hp)

    spec2 = RandomFieldSpec(2, spec.max_degree, spec.coeff_range, spec.count, spec.seed)
    rng = np.random.default_rng(spec.seed)
    worst, witness, samples = 0.0, None, 0
    for fs in random_fields(spec2, 5, "fi-deformed"):
        f1, f2, g1, g2, g3 = (u.poly for u in fs)
        lhs = P(f1, f2, P(g1, g2, g3))
        rhs = (P(P(f1, f2, g1), g2, g3) + P(g1, P(f1, f2, g2), g3)
               + P(g1, g2, P(f1, f2, g3)))
        order1 = (lhs - rhs).coefficient(Var(h), 1)
        fn = compile_numpy(from_poly(order1), (x, y))
        pts = rng.uniform(-2, 2, (10, 2))
        vals = np.abs(np.broadcast_to(fn(pts), (10,)))
        samples += 10
        i = int(np.argmax(vals))
        if vals[i] >= worst:
            worst, witness = float(vals[i]), tuple(float(v) for v in pts[i])
    return VerificationReport(
        "fi[deformed_triple, K=1]", SAMPLED, samples, worst, witness, INFORMATIONAL,
        "order-h coefficient of the FI residual; expected to be nonzero",
        ("deformed-triple-fi",))


def check_jacobi(bracket_id: str, spec: RandomFieldSpec, bracket=None) -> VerificationReport:
    B = _bracket(bracket_id, bracket)

    def residuals():
        for f, g, h in random_fields(spec, 3, "jacobi"):
            yield br.jacobi_residual(lambda a, b: B([a, b]), f, g, h)

    return symbolic_report(f"jacobi[{bracket_id}, n={spec.dim}]", residuals(),
                           covers=("jacobi-identity",), seed=spec.seed)


def select_contact_grouping(spec: RandomFieldSpec) -> tuple[Optional[tuple], dict]:
    """Run the Jacobi identity for every grouping candidate; return the unique survivor."""
    triples = random_fields(spec, 3, "contact")
    results = {}
    for key, candidate in br.CONTACT_CANDIDATES.items():
        ok = all(br.jacobi_residual(candidate, f, g, h).poly.is_zero() for f, g, h in triples)
        results[key] = ok
    survivors = [k for k, ok in results.items() if ok]
    return (survivors[0] if len(survivors) == 1 else None), results


def check_contact(spec: RandomFieldSpec) -> VerificationReport:
    """The configured contact grouping is the unique Jacobi-compatible one."""
    chosen, results = select_contact_grouping(spec)
    name = "contact-grouping"
    detail = ", ".join(f"{br.CONTACT_CANDIDATES[k].__name__}={'ok' if v else 'fails'}"
                       for k, v in results.items())
    if chosen != br.CONTACT_GROUPING:
        rep = check_jacobi("contact", spec)
        rep.name, rep.verdict, rep.detail = name, FAIL, detail
        rep.covers = ("contact-bracket",)
        return rep

    def residuals():
        for f, g, h in random_fields(spec, 3, "contact"):
            yield br.jacobi_residual(br.contact, f, g, h)

    rep = symbolic_report(name, residuals(), covers=("contact-bracket", "jacobi-identity"),
                          seed=spec.seed)
    rep.detail = detail
    return rep


def check_divergence(spec: RandomFieldSpec, generator=None) -> VerificationReport:
    """``div X_{H_1..H_{n-1}} = 0`` and ``div L + n H = 0``."""
    make = generator or modified_generator
    n = spec.dim

    def residuals():
        for hs in random_fields(spec, n, "divergence"):
            if n >= 2:
                yield nambu_vector_field(hs[:n - 1]).divergence()
            T = make(hs)
            yield T.L.divergence() + T.H * n

    return symbolic_report(f"divergence[n={n}]", residuals(),
                           covers=("nambu-volume-preservation", "modified-divergence"),
                           seed=spec.seed)


def check_special_case(spec: RandomFieldSpec) -> VerificationReport:
    """``[1, f_1..f_n] = {f_1..f_n}``."""
    def residuals():
        one = ScalarField.constant(1, spec.coords)
        for fs in random_fields(spec, spec.dim, "special"):
            yield br.modified_nambu([one] + fs) - br.nambu(fs)

    return symbolic_report(f"special-case[n={spec.dim}]", residuals(),
                           covers=("unit-reduces-to-nambu",), seed=spec.seed)


def derivation_residual(T: GeneratorT, fields: list[ScalarField]) -> ScalarField:
    """``T[f_1..f_{n+1}] - sum_i [f_1..T f_i..f_{n+1}]`` for the modified bracket."""
    total = apply_generator(T, br.modified_nambu(fields))
    for i in range(len(fields)):
        moved = fields[:i] + [apply_generator(T, fields[i])] + fields[i + 1:]
        total = total - br.modified_nambu(moved)
    return total


def check_generator_derivation(spec: RandomFieldSpec) -> VerificationReport:
    def residuals():
        n = spec.dim
        for fs in random_fields(spec, 2 * n + 1, "derivation"):
            yield derivation_residual(modified_generator(fs[:n]), fs[n:])

    return symbolic_report(f"generator-derivation[n={spec.dim}]", residuals(),
                           covers=("fundamental-identity", "generator"), seed=spec.seed)


def check_automorphism(spec: RandomFieldSpec) -> VerificationReport:
    """``T_V = V - (1/n) div V`` is a derivation of the modified bracket for any V."""
    n = spec.dim

    def residuals():
        for fs in random_fields(spec, 2 * n + 1, "automorphism"):
            V = VectorField(tuple(f.expr for f in fs[:n]), spec.coords)
            yield derivation_residual(automorphism_from_vector_field(V), fs[n:])

    return symbolic_report(f"automorphism[n={n}]", residuals(),
                           covers=("vector-field-automorphism",), seed=spec.seed)


def check_extension_reproduces(spec: RandomFieldSpec) -> VerificationReport:
    def residuals():
        for fs in random_fields(spec, spec.dim + 1, "extension"):
            yield modified_from_extension(fs) - br.modified_nambu(fs)

    return symbolic_report(f"homogeneous-extension[n={spec.dim}]", residuals(),
                           covers=("homogeneous-extension",), seed=spec.seed)


def check_homogeneity(spec: RandomFieldSpec, lambdas=(2, Fraction(1, 3)),
                      tol: float = 1e-10) -> VerificationReport:
    """The lifted bracket is one-homogeneous in the fiber coordinate."""
    rng = np.random.default_rng(spec.seed)
    ext = HomogeneousExtension(spec.coords)
    residuals, points = [], []
    for fs in random_fields(spec, spec.dim + 1, "homogeneity"):
        F = ext.bracket(fs)
        fn = F.compile()
        for lam in lambdas:
            pts = np.c_[rng.uniform(-2, 2, (5, spec.dim)), rng.uniform(0.5, 2, 5)]
            scaled = pts.copy()
            scaled[:, -1] *= float(lam)
            residuals.append(fn(scaled) - float(lam) * fn(pts))
            points.append(pts)
    return sampled_report(f"homogeneity[n={spec.dim}]", np.concatenate(residuals),
                          np.concatenate(points), tol, covers=("one-homogeneity",))


def check_embedding(spec: RandomFieldSpec, points: int = 20, tol: float = 1e-8) -> VerificationReport:
    """``{h_1..h_n, F}`` on R^(n+1) equals ``T^(k) F``; ``div T^(k) = 0`` exactly."""
    rng = np.random.default_rng(spec.seed)
    n = spec.dim
    res, pts_all = [], []
    for hs in random_fields(spec, n, "embedding"):
        ext, _ = extend_to_k(hs)
        if not ext.divergence().poly.is_zero():
            return VerificationReport(f"embedding[n={n}]", SYMBOLIC, 1, math.inf, None, FAIL,
                                      "extended generator is not divergence free",
                                      ("extended-phase-space",))
        F = random_polynomial(spec.rng(f"F{len(res)}"), ext.coords, spec.max_degree)
        pts = np.c_[rng.uniform(-2, 2, (points, n)), rng.uniform(0.1, 2, points)]
        diff = ext.nambu_bracket(F) - ext.apply(F)
        res.append(np.broadcast_to(compile_numpy(diff.expr, ext.coords)(pts), (points,)))
        pts_all.append(pts)
    return sampled_report(f"embedding[n={n}]", np.concatenate(res), np.concatenate(pts_all),
                          tol, covers=("extended-phase-space",))


def check_extension_flow(spec: RandomFieldSpec, t: float = 0.1, steps: int = 1000,
                         l0: float = 1.0, tol: float = 1e-6) -> VerificationReport:
    """The extended Nambu flow of ``h_i`` projects onto the graph evolution on the base.

    A graph point ``(x0, l0)`` with ``k0 = l0^n`` is carried to ``(x1, k1)``;
    the evolved function must take the value ``k1^(1/n)`` at ``x1``.
    """
    n = spec.dim
    rng = np.random.default_rng(spec.seed)
    res, pts = [], []
    for hs in random_fields(spec, n, "extension-flow"):
        ext, hk = extend_to_k(hs)
        X = nambu_vector_field(hk, ext.density)
        x0 = rng.uniform(-0.5, 0.5, n)
        # a positive test function with f(x0) = l0
        base = ScalarField.parse("1 + " + " + ".join(f"{c}^2" for c in spec.coords), spec.coords)
        f = base * (l0 / base.evaluate(x0))
        try:
            end = integrate_flow(X, [*x0, l0 ** n], t, steps).endpoint
            value = evolve_graph(ext.base, f, end[:n], t, steps)
        except BlowUpError as err:
            return _blowup_report(f"extension-flow[n={n}]", err, ("extended-phase-space",))
        res.append(end[n] ** (1.0 / n) - value)
        pts.append(x0)
    return sampled_report(f"extension-flow[n={n}]", np.array(res), pts, tol,
                          covers=("extended-phase-space", "graph-evolution"))


def check_cocycle(spec: RandomFieldSpec, grid: int = 64, tol: float = 1e-8,
                  factor: Optional[Fraction] = None, name: Optional[str] = None,
                  informational: bool = False) -> VerificationReport:
    """``tau(f_0..f_n)`` against ``factor * int [f_0..f_n]`` on the torus.

    The default factor is ``1/(n+1)``, which integration by parts gives.
    """
    n = spec.dim
    factor = Fraction(1, n + 1) if factor is None else Fraction(factor)
    rng = spec.rng("cocycle")
    res, pts = [], []
    for _ in range(spec.count):
        fs = [random_trig_polynomial(rng, spec.coords) for _ in range(n + 1)]
        v = cyclic_cocycle(fs, grid)
        res.append(v.tau - v.scaled_integral(factor))
        pts.append((v.tau, v.raw_integral))
    detail = f"tau vs ({factor}) * integral of the modified bracket"
    return sampled_report(name or f"cocycle[n={n}, factor={factor}]", np.array(res), pts, tol,
                          covers=("cyclic-cocycle",), detail=detail, informational=informational)


# --- flows ----------------------------------------------------------------

NORM_DEFAULTS = {
    2: dict(hamiltonians=("x^2", "y"), box=6.0, nodes=201),
    3: dict(hamiltonians=("x^2", "y", "z"), box=4.0, nodes=61),
}
NORM_WEIGHT = {2: "(1 + x - y/2 + x*y)", 3: "(1 + x - y/2 + x*z)"}


def norm_drift(n: int = 2, t: float = 0.2, semantics: str = GRAPH, steps: int = 100,
               box: Optional[float] = None, nodes: Optional[int] = None,
               hamiltonians: Optional[Sequence[str]] = None) -> tuple[float, float, float]:
    """Relative change of ``int |g_t|^n`` (trapezoid rule on [-box, box]^n).

    The test function is a polynomial times ``exp(-|x|^2)``.  Points whose
    characteristic escapes get value zero, the exact limit for a decaying f.
    Returns ``(drift, initial, final)``.
    """
    d = NORM_DEFAULTS[n]
    box = d["box"] if box is None else box
    nodes = d["nodes"] if nodes is None else nodes
    coords = default_coords(n)
    hs = [ScalarField.parse(h, coords) for h in (hamiltonians or d["hamiltonians"])]
    T = modified_generator(hs)
    gauss = " + ".join(f"{c}^2" for c in coords)
    f = ScalarField.parse(f"{NORM_WEIGHT[n]}*exp(-({gauss}))", coords)
    axis = np.linspace(-box, box, nodes)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    w1 = np.full(nodes, axis[1] - axis[0])
    w1[0] *= 0.5
    w1[-1] *= 0.5
    w = w1
    for _ in range(n - 1):
        w = np.multiply.outer(w, w1)
    w = w.ravel()
    before = float(np.sum(w * np.abs(f.compile()(pts)) ** n))
    vals = evolve_batch(T, f, pts, t, steps, semantics, escape="zero")
    after = float(np.sum(w * np.abs(vals) ** n))
    return abs(after - before) / before, before, after


def check_norm_preservation(n: int = 2, t: float = 0.2, semantics: str = GRAPH,
                            tol: Optional[float] = None, **kwargs) -> VerificationReport:
    tol = (1e-4 if n == 2 else 1e-3) if tol is None else tol
    name = f"norm[{semantics}, n={n}]"
    covers = ("norm-preservation",)
    try:
        drift, before, after = norm_drift(n, t, semantics, **kwargs)
    except BlowUpError as err:
        return _blowup_report(name, err, covers)
    detail = f"integral {before!r} -> {after!r}"
    if semantics == PULLBACK:
        ratio = drift / tol
        detail += f"; drift is {ratio:.4g} x tolerance ({'exceeds' if ratio > 10 else 'within'} 10x)"
        return VerificationReport(name, SAMPLED, 1, drift, None, INFORMATIONAL, detail, covers)
    verdict = PASS if drift < tol else FAIL
    return VerificationReport(name, SAMPLED, 1, drift, None if verdict == PASS else (t,),
                              verdict, detail, covers)


def numeric_bracket(kind: str, values: list, grads: list) -> np.ndarray:
    """Nambu or modified bracket from pointwise values (m,) and gradients (m, n)."""
    if kind == "nambu":
        return np.linalg.det(np.stack(grads, axis=1))
    if kind != "modified_nambu":
        raise ValueError(f"unknown kind {kind!r}; expected nambu or modified_nambu")
    total = 0.0
    for i in range(len(values)):
        rest = grads[:i] + grads[i + 1:]
        term = values[i] * np.linalg.det(np.stack(rest, axis=1))
        total = total + term if i % 2 == 0 else total - term
    return total


def canonicity_residuals(kind: str, T: GeneratorT, fields: list, points: np.ndarray,
                         t: float, steps: int = 100) -> np.ndarray:
    """``B(U f_1, ..) - U B(f_1, ..)`` at the given points (pullback evolution U)."""
    vg = [pullback_jet(T, f, points, t, steps) for f in fields]
    lhs = numeric_bracket(kind, [v for v, _ in vg], [g for _, g in vg])
    B = br.nambu(fields) if kind == "nambu" else br.modified_nambu(fields)
    rhs = evolve_batch(T, B, points, t, steps, PULLBACK)
    return lhs - rhs


def check_canonicity(kind: str, spec: RandomFieldSpec, t: float = 0.1, points: int = 10,
                     steps: int = 1000, tol: float = 1e-5,
                     hamiltonians: Optional[list] = None) -> VerificationReport:
    """Flows are bracket automorphisms: Nambu flow for ``nambu``, exp(tT) for ``modified_nambu``."""
    n = spec.dim
    fs = random_fields(RandomFieldSpec(n, spec.max_degree, spec.coeff_range, 1, spec.seed),
                       2 * n + 1, f"canonicity-{kind}")[0]
    if kind == "nambu":
        hs = hamiltonians or fs[:n - 1]
        T = GeneratorT(nambu_vector_field(hs), ScalarField.constant(0, spec.coords))
        args = fs[n:2 * n]
    elif kind == "modified_nambu":
        hs = hamiltonians or fs[:n]
        T = modified_generator(hs)
        args = fs[n:2 * n + 1]
    else:
        raise ValueError(f"unknown kind {kind!r}")
    pts = np.random.default_rng(spec.seed).uniform(-1, 1, (points, n))
    name = f"canonicity[{kind}, n={n}]"
    covers = ("canonical-flow",)
    try:
        res = canonicity_residuals(kind, T, args, pts, t, steps)
    except BlowUpError as err:
        return _blowup_report(name, err, covers)
    return sampled_report(name, res, pts, tol, covers=covers, detail=f"t = {t!r}")


# --- registry and suite ---------------------------------------------------

@dataclass(frozen=True)
class CheckDef:
    name: str
    run: Callable[[int, frozenset], VerificationReport]
    tolerance: float = 0.0      # 0 means exact (symbolic)


def _corrupt_modified(fs):
    """A modified bracket with the first term's sign flipped (self-test fixture)."""
    good = br.modified_nambu(fs)
    coords = fs[0].coords
    minor = br.determinant([f.gradient() for f in fs[1:]])
    return good - ScalarField.from_poly(fs[0].poly * minor, coords) * 2


def _corrupt_generator(hs):
    T = modified_generator(hs)
    return GeneratorT(T.L, -T.H, T.hamiltonians)


def _spec(dim, seed, count=10, degree=2, coeffs=(-3, 3)):
    return RandomFieldSpec(dim, degree, coeffs, count, seed)


# flows of random quadratics with larger coefficients escape within t = 0.1
FLOW_COEFFS = (-1, 1)


def _registry() -> list[CheckDef]:
    def bracket_for(corrupt):
        return _corrupt_modified if "bracket_sign" in corrupt else None

    def gen_for(corrupt):
        return _corrupt_generator if "divergence_sign" in corrupt else None

    return [
        CheckDef("antisymmetry-modified-n2", lambda s, c: check_antisymmetry(
            "modified_nambu", _spec(2, s, 20), bracket_for(c))),
        CheckDef("antisymmetry-nambu-n3", lambda s, c: check_antisymmetry("nambu", _spec(3, s))),
        CheckDef("antisymmetry-poisson", lambda s, c: check_antisymmetry("poisson", _spec(2, s))),
        CheckDef("leibniz-nambu-n3", lambda s, c: check_leibniz("nambu", _spec(3, s))),
        CheckDef("leibniz-poisson", lambda s, c: check_leibniz("poisson", _spec(2, s))),
        CheckDef("leibniz-modified-n2", lambda s, c: check_leibniz("modified_nambu", _spec(2, s))),
        CheckDef("fi-modified-n2", lambda s, c: check_fi(
            "modified_nambu", _spec(2, s), bracket_for(c))),
        CheckDef("fi-modified-n3", lambda s, c: check_fi("modified_nambu", _spec(3, s, 5))),
        CheckDef("fi-nambu-n3", lambda s, c: check_fi("nambu", _spec(3, s))),
        CheckDef("jacobi-poisson", lambda s, c: check_jacobi("poisson", _spec(2, s, degree=3))),
        CheckDef("contact-grouping", lambda s, c: check_contact(_spec(3, s, degree=3))),
        CheckDef("divergence-n2", lambda s, c: check_divergence(_spec(2, s), gen_for(c))),
        CheckDef("divergence-n3", lambda s, c: check_divergence(_spec(3, s), gen_for(c))),
        CheckDef("generator-derivation-n2", lambda s, c: check_generator_derivation(_spec(2, s, 5))),
        CheckDef("special-case-n2", lambda s, c: check_special_case(_spec(2, s))),
        CheckDef("special-case-n3", lambda s, c: check_special_case(_spec(3, s))),
        CheckDef("automorphism-n2", lambda s, c: check_automorphism(_spec(2, s))),
        CheckDef("homogeneous-extension-n2", lambda s, c: check_extension_reproduces(_spec(2, s))),
        CheckDef("homogeneous-extension-n3", lambda s, c: check_extension_reproduces(_spec(3, s, 5))),
        CheckDef("homogeneity-n2", lambda s, c: check_homogeneity(_spec(2, s, 5)), 1e-10),
        CheckDef("embedding-n2", lambda s, c: check_embedding(_spec(2, s)), 1e-8),
        CheckDef("extension-flow-n2", lambda s, c: check_extension_flow(_spec(2, s, coeffs=FLOW_COEFFS)), 1e-6),
        CheckDef("cocycle-n2", lambda s, c: check_cocycle(_spec(2, s, 50)), 1e-8),
        CheckDef("cocycle-n2-factor-1/n", lambda s, c: check_cocycle(
            _spec(2, s, 50), factor=Fraction(1, 2), name="cocycle[n=2, factor=1/n]",
            informational=True)),
        CheckDef("norm-graph-n2", lambda s, c: check_norm_preservation(2, 0.2, GRAPH), 1e-4),
        CheckDef("norm-pullback-n2", lambda s, c: check_norm_preservation(2, 0.2, PULLBACK)),
        CheckDef("norm-graph-n3", lambda s, c: check_norm_preservation(3, 0.2, GRAPH), 1e-3),
        CheckDef("canonicity-nambu-n3", lambda s, c: check_canonicity("nambu", _spec(3, s, coeffs=FLOW_COEFFS)), 1e-5),
        CheckDef("canonicity-modified-n2", lambda s, c: check_canonicity(
            "modified_nambu", _spec(2, s, coeffs=FLOW_COEFFS)), 1e-5),
        CheckDef("fi-deformed-triple", lambda s, c: check_fi_deformed(_spec(2, s, 3))),
    ]


REGISTRY = {c.name: c for c in _registry()}
CORRUPTIONS = ("bracket_sign", "divergence_sign")


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    checks: Optional[tuple] = None      # None runs everything, in registration order
    corrupt: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ValueError(f"seed must be an integer, got {self.seed!r}")
        if self.checks is not None:
            object.__setattr__(self, "checks", tuple(self.checks))
            unknown = [c for c in self.checks if c not in REGISTRY]
            if unknown:
                raise ValueError(f"unknown checks {unknown}; known: {list(REGISTRY)}")
        bad = set(self.corrupt) - set(CORRUPTIONS)
        if bad:
            raise ValueError(f"unknown corruption {sorted(bad)}")
        object.__setattr__(self, "corrupt", frozenset(self.corrupt))


def run_suite(config: SuiteConfig = SuiteConfig()) -> list[VerificationReport]:
    """Run the selected checks in registration order."""
    names = list(REGISTRY) if config.checks is None else [
        n for n in REGISTRY if n in config.checks]
    return [REGISTRY[n].run(config.seed, config.corrupt) for n in names]


def suite_failed(reports: Sequence[VerificationReport]) -> bool:
    return any(r.verdict == FAIL for r in reports)


def coverage(reports: Sequence[VerificationReport]) -> list[str]:
    """Identity names exercised by the reports, sorted."""
    return sorted({c for r in reports for c in r.covers})


def reports_to_json(reports: Sequence[VerificationReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=False)


def format_table(reports: Sequence[VerificationReport]) -> str:
    rows = [("check", "mode", "samples", "max|residual|", "verdict")]
    for r in reports:
        rows.append((r.name, r.mode, str(r.samples), repr(r.max_residual), r.verdict))
    widths = [max(len(row[i]) for row in rows) for i in range(5)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    for r in reports:
        if r.verdict != PASS and r.detail:
            lines.append(f"{r.name}: {r.detail}")
        if r.verdict == FAIL and r.witness is not None:
            lines.append(f"{r.name}: witness {list(r.witness)}")
    lines.append("coverage: " + ", ".join(coverage(reports)))
    return "\n".join(lines)
