"""Generators, vector fields and flows of Nambu and modified Nambu dynamics.

A modified-Nambu evolution is driven by an operator ``T = L + H``: a vector
field plus a multiplier.  Two readings of "evolve f by T for time t" are
provided.

graph
    The graph of ``f`` is advected by ``L + H l d_l`` on R^n x R.  The value
    at ``p`` is ``f(q) exp(int H)`` where ``q`` is reached from ``p`` by
    flowing backwards along ``L``.  With ``div L = -n H`` this keeps
    ``int |f|^n`` fixed.
pullback
    The solution of ``du/dt = L u + H u``: flow forwards along ``L`` from
    ``p`` and multiply by ``exp(int H)``.  This is the semigroup that maps
    brackets to brackets.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, TextIO

import numpy as np

from .brackets import BracketError, NambuDensity, _check_same_coords, nambu
from .expr import Poly, ScalarField, as_point, compile_numpy, from_poly
from .vectorfield import VectorField

GRAPH = "graph"
PULLBACK = "pullback"
SEMANTICS = (GRAPH, PULLBACK)


class BlowUpError(ArithmeticError):
    """The trajectory left the finite numbers; ``last_time`` is the last good time."""

    def __init__(self, last_time: float, trajectory: Optional["Trajectory"] = None):
        super().__init__(f"trajectory blew up after t = {last_time!r}")
        self.last_time = last_time
        self.trajectory = trajectory


# --- generators -----------------------------------------------------------

@dataclass(frozen=True)
class GeneratorT:
    """First-order operator ``T = L + H`` (vector field plus multiplier)."""

    L: VectorField
    H: ScalarField
    hamiltonians: tuple[ScalarField, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.L.coords != self.H.coords:
            raise BracketError("L and H live on different coordinates")

    @property
    def coords(self) -> tuple[str, ...]:
        return self.L.coords

    @property
    def dim(self) -> int:
        return self.L.dim

    def compatibility_residual(self) -> ScalarField:
        """``div L + n H``; zero exactly when T is an automorphism generator."""
        return divergence(self.L) + self.H * self.dim

    def is_compatible(self) -> bool:
        return self.compatibility_residual().poly.is_zero()


def hamiltonian_vector_field(H: ScalarField) -> VectorField:
    """X_H with ``X_H f = {H, f}`` for the canonical Poisson bracket."""
    n = H.dim
    if n % 2:
        raise BracketError(f"Hamiltonian vector fields need an even dimension, got {n}")
    m = n // 2
    hp = H.poly
    comps: list[Poly] = [Poly()] * n
    for i in range(m):
        q, p = H.coords[i], H.coords[i + m]
        comps[i] = -hp.diff(p)
        comps[i + m] = hp.diff(q)
    return VectorField.from_polys(comps, H.coords)


def nambu_vector_field(hamiltonians: Sequence[ScalarField], density: Optional[NambuDensity] = None) -> VectorField:
    """The field X with ``X f = {H_1, ..., H_{n-1}, f}``; components are brackets with coordinates."""
    hamiltonians = list(hamiltonians)
    if not hamiltonians:
        raise BracketError("need n - 1 Hamiltonians; use a coordinate list for n = 1")
    coords = _check_same_coords(hamiltonians)
    return _nambu_field(hamiltonians, coords, density)


def _nambu_field(hamiltonians, coords, density=None) -> VectorField:
    n = len(coords)
    if len(hamiltonians) != n - 1:
        raise BracketError(f"expected {n - 1} Hamiltonians on R^{n}, got {len(hamiltonians)}")
    comps = []
    for name in coords:
        xi = ScalarField.coordinate(name, coords)
        comps.append(nambu(list(hamiltonians) + [xi], density).poly)
    return VectorField.from_polys(comps, coords)


def modified_generator(hamiltonians: Sequence[ScalarField]) -> GeneratorT:
    """``T`` with ``T f = [H_1, ..., H_n, f]`` for the modified bracket.

    ``L = sum_i (-1)^(i+1) H_i X_{H_1..^H_i..H_n}`` and
    ``H = (-1)^n {H_1, ..., H_n}``; the sign makes ``T f`` agree with the
    bracket for every n and gives ``div L = -n H``.
    """
    hamiltonians = list(hamiltonians)
    if not hamiltonians:
        raise BracketError("no Hamiltonians")
    coords = _check_same_coords(hamiltonians)
    n = len(coords)
    if len(hamiltonians) != n:
        raise BracketError(f"expected {n} Hamiltonians on R^{n}, got {len(hamiltonians)}")
    L = VectorField.zero(coords)
    for i, h in enumerate(hamiltonians):
        rest = hamiltonians[:i] + hamiltonians[i + 1:]
        X = _nambu_field(rest, coords)
        term = X.scaled(h)
        L = L + term if i % 2 == 0 else L - term
    H = nambu(hamiltonians)
    if n % 2:
        H = -H
    return GeneratorT(L, H, tuple(hamiltonians))


def divergence(V: VectorField) -> ScalarField:
    return V.divergence()


def automorphism_from_vector_field(V: VectorField) -> GeneratorT:
    """``T_V = V - (1/n) div V``, an infinitesimal automorphism of the modified bracket."""
    H = divergence(V) * Fraction(-1, V.dim)
    return GeneratorT(V, H)


def apply_generator(T: GeneratorT, f: ScalarField) -> ScalarField:
    if f.coords != T.coords:
        raise BracketError(f"coordinate mismatch: {f.coords} vs {T.coords}")
    return T.L.apply(f) + T.H * f


# --- trajectories ---------------------------------------------------------

@dataclass
class Trajectory:
    times: np.ndarray          # (k,)
    states: np.ndarray         # (k, n)
    log_amplitude: np.ndarray  # (k,)
    coords: tuple[str, ...]

    @property
    def endpoint(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.states[-1])

    def rows(self):
        for t, s, a in zip(self.times, self.states, self.log_amplitude):
            yield [float(t), *map(float, s), float(a)]

    def write_csv(self, out: TextIO) -> None:
        """CSV with header ``t,<coords>,log_amp`` and 17 significant digits."""
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["t", *self.coords, "log_amp"])
        for row in self.rows():
            w.writerow([f"{v:.17g}" for v in row])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


@dataclass
class _Run:
    final: np.ndarray     # (m, d)
    path: list            # arrays (m, d), one per recorded step
    alive: np.ndarray     # (m,) bool
    last_step: np.ndarray  # (m,) last finite step index


def _rk4(rhs: Callable[[np.ndarray], np.ndarray], y0: np.ndarray, h: float,
         steps: int, record: bool) -> _Run:
    """Classical fixed-step RK4 on a batch of states (m, d).

    Rows that become non-finite are frozen at their last finite state.
    """
    y = np.array(y0, dtype=float)
    m = y.shape[0]
    alive = np.isfinite(y).all(axis=1)
    last = np.zeros(m, dtype=int)
    path = [y.copy()] if record else []
    for k in range(1, steps + 1):
        idx = np.nonzero(alive)[0]
        if idx.size == 0:
            break
        ya = y[idx]
        with np.errstate(all="ignore"):
            k1 = rhs(ya)
            k2 = rhs(ya + 0.5 * h * k1)
            k3 = rhs(ya + 0.5 * h * k2)
            k4 = rhs(ya + h * k3)
            ynew = ya + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        ok = np.isfinite(ynew).all(axis=1)
        y[idx[ok]] = ynew[ok]
        last[idx[ok]] = k
        alive[idx[~ok]] = False
        if record:
            path.append(y.copy())
    return _Run(y, path, alive, last)


def _augmented_rhs(V: VectorField, H: Optional[ScalarField], sign: float):
    vf = V.compile()
    hf = H.compile() if H is not None else None

    def rhs(Y: np.ndarray) -> np.ndarray:
        X = Y[:, :-1]
        out = np.empty_like(Y)
        out[:, :-1] = sign * vf(X)
        out[:, -1] = hf(X) if hf is not None else 0.0
        return out

    return rhs


def _characteristic(V: VectorField, H: Optional[ScalarField], p, t: float,
                    steps: int, sign: float) -> Trajectory:
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if not np.isfinite(t) or t < 0:
        raise ValueError("t must be a finite non-negative time")
    p = as_point(p, V.dim)
    y0 = np.array([[*p, 0.0]])
    if t == 0:
        return Trajectory(np.array([0.0]), np.array([p]), np.array([0.0]), V.coords)
    h = t / steps
    run = _rk4(_augmented_rhs(V, H, sign), y0, h, steps, record=True)
    k = int(run.last_step[0])
    Y = np.array([s[0] for s in run.path[: k + 1]])
    traj = Trajectory(h * np.arange(k + 1), Y[:, :-1], Y[:, -1], V.coords)
    if not run.alive[0]:
        raise BlowUpError(float(k * h), traj)
    return traj


def integrate_flow(V: VectorField, p, t: float, steps: int = 100) -> Trajectory:
    """Flow of ``V`` from ``p`` for time ``t`` with ``steps`` RK4 steps of size t/steps."""
    return _characteristic(V, None, p, t, steps, 1.0)


def characteristic(T: GeneratorT, p, t: float, steps: int, semantics: str) -> Trajectory:
    """Path and accumulated log-amplitude that determine the evolved value at ``p``."""
    if semantics == GRAPH:
        return _characteristic(T.L, T.H, p, t, steps, -1.0)
    if semantics == PULLBACK:
        return _characteristic(T.L, T.H, p, t, steps, 1.0)
    raise ValueError(f"unknown semantics {semantics!r}; expected one of {SEMANTICS}")


def _evolve(T: GeneratorT, f: ScalarField, p, t, steps, semantics) -> float:
    if f.coords != T.coords:
        raise BracketError("f and T live on different coordinates")
    if t == 0:
        return f.evaluate(as_point(p, T.dim))
    traj = characteristic(T, p, t, steps, semantics)
    return f.evaluate(traj.states[-1]) * float(np.exp(traj.log_amplitude[-1]))


def evolve_graph(T: GeneratorT, f: ScalarField, p, t: float, steps: int = 100) -> float:
    """Value at ``p`` of f's graph advected by ``L + H l d_l`` for time ``t``."""
    return _evolve(T, f, p, t, steps, GRAPH)


def evolve_pullback(T: GeneratorT, f: ScalarField, p, t: float, steps: int = 100) -> float:
    """``(exp(tT) f)(p)`` for the PDE ``du/dt = L u + H u``."""
    return _evolve(T, f, p, t, steps, PULLBACK)


def evolve_batch(T: GeneratorT, f: ScalarField, points: np.ndarray, t: float, steps: int,
                 semantics: str, escape: str = "raise") -> np.ndarray:
    """Vectorised :func:`evolve_graph` / :func:`evolve_pullback` over points (m, n).

    ``escape="zero"`` assigns 0 to points whose characteristic runs off to
    infinity within time ``t``.  That is the exact limit for functions that
    decay at infinity; with ``"raise"`` any escape raises BlowUpError.
    """
    if semantics not in SEMANTICS:
        raise ValueError(f"unknown semantics {semantics!r}")
    pts = np.asarray(points, dtype=float)
    fn = f.compile()
    if t == 0:
        return fn(pts)
    sign = -1.0 if semantics == GRAPH else 1.0
    y0 = np.concatenate([pts, np.zeros((pts.shape[0], 1))], axis=1)
    run = _rk4(_augmented_rhs(T.L, T.H, sign), y0, t / steps, steps, record=False)
    return _finish(fn, run.final, run, t / steps, escape)


def pullback_jet(T: GeneratorT, f: ScalarField, points: np.ndarray, t: float,
                 steps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Values and gradients of ``exp(tT) f`` at points (m, n).

    The flow Jacobian ``J`` and the gradient of the log-amplitude are carried
    along with the state (variational equations), so the gradient has the
    same RK4 accuracy as the value.
    """
    if f.coords != T.coords:
        raise BracketError("f and T live on different coordinates")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m, n = pts.shape
    coords = T.coords
    vf, hf = T.L.compile(), T.H.compile()
    dv = [[compile_numpy(from_poly(c.diff(x)), coords) for x in coords] for c in T.L.polys]
    dh = [compile_numpy(from_poly(T.H.poly.diff(x)), coords) for x in coords]

    def rhs(Y: np.ndarray) -> np.ndarray:
        X = Y[:, :n]
        J = Y[:, n + 1:n + 1 + n * n].reshape(-1, n, n)
        DV = np.stack([np.stack([np.broadcast_to(g(X), X.shape[:1]) for g in row], axis=-1)
                       for row in dv], axis=1)
        DH = np.stack([np.broadcast_to(g(X), X.shape[:1]) for g in dh], axis=-1)
        out = np.empty_like(Y)
        out[:, :n] = vf(X)
        out[:, n] = hf(X)
        out[:, n + 1:n + 1 + n * n] = (DV @ J).reshape(-1, n * n)
        out[:, n + 1 + n * n:] = np.einsum("mi,mij->mj", DH, J)
        return out

    y0 = np.concatenate([pts, np.zeros((m, 1)), np.tile(np.eye(n).ravel(), (m, 1)),
                         np.zeros((m, n))], axis=1)
    if t == 0:
        y = y0
    else:
        run = _rk4(rhs, y0, t / steps, steps, record=False)
        if not run.alive.all():
            bad = int(np.argmin(run.alive))
            raise BlowUpError(float(run.last_step[bad] * t / steps))
        y = run.final
    q, a = y[:, :n], y[:, n]
    J = y[:, n + 1:n + 1 + n * n].reshape(-1, n, n)
    ga = y[:, n + 1 + n * n:]
    fq = np.broadcast_to(f.compile()(q), (m,))
    gf = np.stack([np.broadcast_to(compile_numpy(from_poly(d), coords)(q), (m,))
                   for d in f.gradient()], axis=-1)
    amp = np.exp(a)
    values = fq * amp
    grads = amp[:, None] * (np.einsum("mi,mij->mj", gf, J) + fq[:, None] * ga)
    return values, grads


def _finish(fn, y, run, h, escape):
    values = np.zeros(y.shape[0])
    alive = run.alive
    if not alive.all() and escape == "raise":
        bad = int(np.argmin(alive))
        raise BlowUpError(float(run.last_step[bad] * h))
    q, a = y[alive, :-1], y[alive, -1]
    fq = fn(q)
    with np.errstate(all="ignore"):
        vals = np.where(fq == 0.0, 0.0, fq * np.exp(a))
    bad = ~np.isfinite(vals)
    if bad.any():
        if escape != "zero":
            raise BlowUpError(float(h * run.last_step.min()))
        # still finite but far enough out that f(q) overflows: escaped as well
        vals[bad] = 0.0
    values[alive] = vals
    return values
