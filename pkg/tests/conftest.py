import random

import pytest

from bracket_engine.expr import ScalarField
from bracket_engine.verify import random_polynomial

XY = ("x", "y")
XYZ = ("x", "y", "z")


def sf(text, coords=XY):
    return ScalarField.parse(text, coords)


def random_polys(seed, coords, count, degree=2, coeffs=(-3, 3)):
    rng = random.Random(seed)
    return [random_polynomial(rng, coords, degree, coeffs) for _ in range(count)]


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance criterion.

    Call with ``(label, passed, measured, elapsed)``; the line is printed
    immediately and repeated in the terminal summary.
    """
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])

    def record(label, passed, measured, elapsed):
        line = f"{'PASS' if passed else 'FAIL'}  {label}: {measured} ({elapsed:.2f} s)"
        lines.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.__dict__.get("_acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
