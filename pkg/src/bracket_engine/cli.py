"""Command-line front end: ``bracket-engine <task> problem.toml``.

Exit status: 0 success, 1 a verification check failed, 2 invalid input,
3 a trajectory blew up.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import Any, Optional, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import verify
from .brackets import BRACKETS, BracketError, modified_nambu
from .dynamics import (
    SEMANTICS, BlowUpError, characteristic, hamiltonian_vector_field,
    integrate_flow, modified_generator, nambu_vector_field,
)
from .expr import ExprError, ExprDomainError, ScalarField, default_coords
from .extension import cyclic_cocycle, extend_to_k, modified_from_extension
from .vectorfield import VectorField

TASKS = ("bracket", "flow", "evolve", "verify", "cocycle", "embed")
EXIT_OK, EXIT_VERIFY_FAIL, EXIT_INVALID, EXIT_BLOWUP = 0, 1, 2, 3


class ProblemError(ValueError):
    """The problem file is inconsistent or incomplete."""


def _fmt(v: float) -> str:
    return repr(float(v))


class Problem:
    """A parsed problem file: coordinates, named fields and the task table."""

    def __init__(self, data: dict, task: str):
        self.data = data
        file_task = data.get("task", task)
        if file_task != task:
            raise ProblemError(f"file declares task {file_task!r}, command is {task!r}")
        self.task = task
        coords = data.get("coords")
        dim = data.get("dim")
        if coords is None and dim is None:
            if task != "verify":
                raise ProblemError("give 'coords' or 'dim'")
            coords = []
        elif coords is None:
            coords = list(default_coords(self._int(dim, "dim")))
        if not isinstance(coords, list) or not all(isinstance(c, str) for c in coords):
            raise ProblemError("'coords' must be a list of names")
        self.coords = tuple(coords)
        if dim is not None and self._int(dim, "dim") != len(self.coords):
            raise ProblemError(f"dim = {dim} but {len(self.coords)} coordinates given")
        raw = data.get("fields", {})
        if not isinstance(raw, dict):
            raise ProblemError("'fields' must be a table of name = expression")
        self.fields = {}
        for name, text in raw.items():
            if not isinstance(text, str):
                raise ProblemError(f"field {name!r} must be an expression string")
            self.fields[name] = ScalarField.parse(text, self.coords)
        self.params = data.get(task, {})
        if not isinstance(self.params, dict):
            raise ProblemError(f"[{task}] must be a table")

    @staticmethod
    def _int(v: Any, what: str) -> int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ProblemError(f"{what} must be an integer, got {v!r}")
        return v

    def integer(self, key: str, default=None) -> int:
        v = self.params.get(key, default)
        if v is None:
            raise ProblemError(f"[{self.task}] needs '{key}'")
        return self._int(v, key)

    def real(self, key: str, default=None) -> float:
        v = self.params.get(key, default)
        if v is None:
            raise ProblemError(f"[{self.task}] needs '{key}'")
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ProblemError(f"{key} must be a finite number, got {v!r}")
        return float(v)

    def point(self, key: str = "point") -> list[float]:
        v = self.params.get(key)
        if not isinstance(v, list) or len(v) != len(self.coords):
            raise ProblemError(f"'{key}' must be a list of {len(self.coords)} numbers")
        return [self._number(x, key) for x in v]

    def _number(self, x, what):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise ProblemError(f"{what} entries must be numbers, got {x!r}")
        return float(x)

    def resolve(self, ref: Any) -> ScalarField:
        """A field name, a coordinate name or a numeric literal."""
        if isinstance(ref, bool):
            raise ProblemError(f"invalid argument {ref!r}")
        if isinstance(ref, (int, float)):
            return ScalarField.constant(Fraction(ref) if isinstance(ref, int) else ref, self.coords)
        if not isinstance(ref, str):
            raise ProblemError(f"invalid argument {ref!r}")
        if ref in self.fields:
            return self.fields[ref]
        if ref in self.coords:
            return ScalarField.coordinate(ref, self.coords)
        try:
            return ScalarField.constant(Fraction(ref), self.coords)
        except ValueError:
            raise ProblemError(f"undefined name {ref!r}") from None

    def resolve_list(self, key: str) -> list[ScalarField]:
        v = self.params.get(key)
        if not isinstance(v, list) or not v:
            raise ProblemError(f"[{self.task}] needs a non-empty list '{key}'")
        return [self.resolve(r) for r in v]

    def seed(self, override: Optional[int]) -> int:
        if override is not None:
            return override
        v = self.params.get("seed", self.data.get("seed", 0))
        return self._int(v, "seed")


# --- commands -------------------------------------------------------------

def cmd_bracket(p: Problem, args) -> tuple[int, str]:
    bid = p.params.get("id")
    if bid not in BRACKETS:
        raise ProblemError(f"[bracket] id must be one of {sorted(BRACKETS)}, got {bid!r}")
    result = BRACKETS[bid][0](p.resolve_list("args"))
    text = str(result.simplify())
    if args.json:
        return EXIT_OK, json.dumps({"bracket": bid, "result": text})
    return EXIT_OK, text


def _flow_field(p: Problem) -> VectorField:
    if "field" in p.params:
        comps = p.params["field"]
        if not isinstance(comps, list) or not all(isinstance(c, str) for c in comps):
            raise ProblemError("'field' must be a list of expression strings")
        return VectorField.parse(comps, p.coords)
    hs = p.resolve_list("hamiltonians")
    kind = p.params.get("kind", "nambu")
    if kind == "nambu":
        return nambu_vector_field(hs)
    if kind == "hamiltonian":
        if len(hs) != 1:
            raise ProblemError("kind = 'hamiltonian' takes one Hamiltonian")
        return hamiltonian_vector_field(hs[0])
    if kind == "modified":
        return modified_generator(hs).L
    raise ProblemError(f"unknown kind {kind!r}; expected nambu, hamiltonian or modified")


def _trajectory_output(traj, args, extra: Optional[dict] = None) -> str:
    if args.json:
        payload = {"columns": ["t", *traj.coords, "log_amp"],
                   "rows": [[float(v) for v in row] for row in traj.rows()]}
        payload.update(extra or {})
        return json.dumps(payload)
    return traj.to_csv().rstrip("\n")


def cmd_flow(p: Problem, args) -> tuple[int, str]:
    V = _flow_field(p)
    traj = integrate_flow(V, p.point(), p.real("t"), p.integer("steps", 100))
    return EXIT_OK, _trajectory_output(traj, args)


def cmd_evolve(p: Problem, args) -> tuple[int, str]:
    semantics = p.params.get("semantics")
    if semantics not in SEMANTICS:
        raise ProblemError(f"[evolve] needs semantics = one of {SEMANTICS}")
    T = modified_generator(p.resolve_list("hamiltonians"))
    f = p.resolve(p.params.get("f", ""))
    t = p.real("t")
    traj = characteristic(T, p.point(), t, p.integer("steps", 100), semantics)
    value = f.evaluate(traj.states[-1]) * math.exp(float(traj.log_amplitude[-1]))
    if args.json:
        return EXIT_OK, _trajectory_output(traj, args, {"semantics": semantics, "value": value})
    print(f"value {_fmt(value)}", file=sys.stderr)
    return EXIT_OK, _trajectory_output(traj, args)


def cmd_verify(p: Problem, args) -> tuple[int, str]:
    checks = p.params.get("checks")
    if checks is not None and (not isinstance(checks, list)
                               or not all(isinstance(c, str) for c in checks)):
        raise ProblemError("'checks' must be a list of check names")
    config = verify.SuiteConfig(seed=p.seed(args.seed), checks=checks,
                                corrupt=frozenset(args.corrupt or ()))
    reports = verify.run_suite(config)
    out = verify.reports_to_json(reports) if args.json else verify.format_table(reports)
    return (EXIT_VERIFY_FAIL if verify.suite_failed(reports) else EXIT_OK), out


def cmd_cocycle(p: Problem, args) -> tuple[int, str]:
    fields = p.resolve_list("args")
    n = len(p.coords)
    v = cyclic_cocycle(fields, p.integer("grid", 64))
    literal = v.scaled_integral(Fraction(1, n))
    if args.json:
        return EXIT_OK, json.dumps({"tau": v.tau, "integral": v.raw_integral,
                                    "integral_over_n": literal,
                                    "integral_over_n_plus_1": v.bracket_integral})
    return EXIT_OK, "\n".join([
        f"tau {_fmt(v.tau)}",
        f"integral/n {_fmt(literal)}",
        f"integral/(n+1) {_fmt(v.bracket_integral)}",
    ])


def cmd_embed(p: Problem, args) -> tuple[int, str]:
    hs = p.resolve_list("hamiltonians")
    n = len(p.coords)
    seed = p.seed(args.seed)
    ext, _ = extend_to_k(hs)
    if "F" in p.params:
        F = ScalarField.parse(p.params["F"], ext.coords)
    else:
        rng = verify.RandomFieldSpec(n + 1, 2, seed=seed).rng("embed")
        F = verify.random_polynomial(rng, ext.coords, 2)
    count = p.integer("points", 20)
    rng = np.random.default_rng(seed)
    pts = np.c_[rng.uniform(-2, 2, (count, n)), rng.uniform(0.1, 2, count)]
    r_k = ext.embedding_residual(F, pts)
    bargs = p.resolve_list("args") if "args" in p.params else hs + [
        ScalarField.coordinate(p.coords[0], p.coords)]
    diff = modified_from_extension(bargs) - modified_nambu(bargs)
    r_y = 0.0 if diff.poly.is_zero() else float(diff.is_zero(seed=seed).max_abs)
    if args.json:
        return EXIT_OK, json.dumps({"extend_to_k": r_k, "modified_from_extension": r_y,
                                    "certified": diff.poly.is_zero()})
    return EXIT_OK, (f"extend_to_k residual {_fmt(r_k)}\n"
                     f"modified_from_extension residual {_fmt(r_y)}")


COMMANDS = {
    "bracket": cmd_bracket, "flow": cmd_flow, "evolve": cmd_evolve,
    "verify": cmd_verify, "cocycle": cmd_cocycle, "embed": cmd_embed,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bracket-engine",
                                     description="Nambu and modified Nambu bracket toolkit.")
    parser.add_argument("task", choices=TASKS)
    parser.add_argument("file", help="TOML problem file")
    parser.add_argument("--out", help="write the result here instead of stdout")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--seed", type=int, help="override the file's seed")
    parser.add_argument("--corrupt", action="append", choices=verify.CORRUPTIONS,
                        help=argparse.SUPPRESS)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.file, "rb") as fh:
            data = tomllib.load(fh)
        problem = Problem(data, args.task)
        code, text = COMMANDS[args.task](problem, args)
    except BlowUpError as err:
        print(f"error: blow-up, last good time {err.last_time!r}", file=sys.stderr)
        return EXIT_BLOWUP
    except (OSError, tomllib.TOMLDecodeError, ExprError, ExprDomainError, BracketError,
            ValueError, TypeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
