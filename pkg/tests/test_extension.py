import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from bracket_engine.brackets import BracketError, modified_nambu, poisson
from bracket_engine.dynamics import evolve_graph, integrate_flow, nambu_vector_field
from bracket_engine.expr import ScalarField
from bracket_engine.extension import (
    HomogeneousExtension, cyclic_cocycle, extend_to_k, fresh_name,
    modified_from_extension, pullback_to_l,
)
from bracket_engine.verify import (
    PASS, FAIL, RandomFieldSpec, check_cocycle, check_embedding, check_extension_flow,
    check_homogeneity, random_trig_polynomial,
)

from conftest import XY, XYZ, random_polys, sf

seeds = st.integers(0, 10_000)
XYK = ("x", "y", "k")


def ext_points(rng, n, count=20):
    return np.c_[rng.uniform(-2, 2, (count, n)), rng.uniform(0.1, 2, count)]


def test_fresh_name():
    assert fresh_name("k", XY) == "k"
    assert fresh_name("y", XY) == "y1"
    assert fresh_name("y", ("y", "y1")) == "y2"


# --- k-form ---------------------------------------------------------------

def test_k_extension_example():
    ext, hs = extend_to_k([sf("x^2"), sf("y")])
    assert ext.coords == XYK
    assert [str(c) for c in ext.vector_field().components] == ["-x^2", "-2*x*y", "4*k*x"]
    assert ext.divergence().poly.is_zero()
    # h_i = H_i sqrt(2k)
    pt = (0.7, -0.4, 1.3)
    assert hs[0].evaluate(pt) == pytest.approx(0.49 * math.sqrt(2.6), rel=1e-14)
    assert hs[1].evaluate(pt) == pytest.approx(-0.4 * math.sqrt(2.6), rel=1e-14)


def test_k_extension_degenerate():
    ext, hs = extend_to_k([sf("x"), sf("x")])
    assert all(q.is_zero() for q in ext.vector_field().polys)
    F = ScalarField.parse("x*y*k + k^2", XYK)
    assert ext.embedding_residual(F, ext_points(np.random.default_rng(0), 2)) == 0.0


def test_k_extension_arity():
    with pytest.raises((BracketError, ValueError)):
        extend_to_k([sf("x")])


@settings(max_examples=10, deadline=None)
@given(seeds, st.sampled_from([XY, XYZ]))
def test_k_extension_divergence_free(seed, coords):
    ext, _ = extend_to_k(random_polys(seed, coords, len(coords)))
    assert ext.divergence().poly.is_zero()


@pytest.mark.parametrize("coords", [XY, XYZ])
def test_k_extension_reproduces_generator(coords):
    rng = np.random.default_rng(3)
    for seed in range(4):
        ext, _ = extend_to_k(random_polys(seed, coords, len(coords)))
        F = random_polys(seed + 100, ext.coords, 1)[0]
        assert ext.embedding_residual(F, ext_points(rng, len(coords))) < 1e-8


# --- l-form ---------------------------------------------------------------

def test_l_form_example():
    ext, _ = extend_to_k([sf("x^2"), sf("y")])
    lf = pullback_to_l(ext)
    assert lf.generator.coords == ("x", "y", "l")
    assert str(lf.volume_density) == "2*l"
    pt = (0.3, 1.1, 0.8)
    assert lf.hamiltonians[0].evaluate(pt) == pytest.approx(math.sqrt(2) * 0.8 * 0.09, rel=1e-14)
    assert lf.hamiltonians[1].evaluate(pt) == pytest.approx(math.sqrt(2) * 0.8 * 1.1, rel=1e-14)
    assert lf.density.c.evaluate(pt) == pytest.approx(0.5 / 0.8, rel=1e-14)
    assert [str(c) for c in lf.generator.vector_field().components] == ["-x^2", "-2*x*y", "2*l*x"]


def test_l_slice_consistency():
    ext, _ = extend_to_k([sf("x^2 + y"), sf("x*y")])
    lf = pullback_to_l(ext)
    T = ext.base
    f = sf("x^3 - y")
    lifted = ScalarField(f.expr, lf.generator.coords)
    first_order = lf.generator.apply(lifted)
    # at l = 1 the l-independent function sees only the transport part L
    for pt in [(0.2, 0.4), (-1.0, 0.5)]:
        assert first_order.evaluate((*pt, 1.0)) == pytest.approx(T.L.apply(f).evaluate(pt), abs=1e-12)
    # and the graph function l*f sees L f + H f
    graph = ScalarField.parse("l*(x^3 - y)", lf.generator.coords)
    Tf = T.L.apply(f) + T.H * f
    for pt in [(0.2, 0.4), (-1.0, 0.5)]:
        assert lf.generator.apply(graph).evaluate((*pt, 1.0)) == pytest.approx(Tf.evaluate(pt), abs=1e-12)


@pytest.mark.parametrize("coords", [XY, XYZ])
def test_l_density_oracle(coords):
    rng = np.random.default_rng(5)
    for seed in range(3):
        ext, _ = extend_to_k(random_polys(seed, coords, len(coords)))
        lf = pullback_to_l(ext)
        F = random_polys(seed + 50, lf.generator.coords, 1)[0]
        assert lf.generator.embedding_residual(F, ext_points(rng, len(coords))) < 1e-8


# --- equivalence of the extended and graph dynamics -----------------------

@pytest.mark.parametrize("k0", [1.0, 0.5])
def test_extended_flow_projects_to_graph_evolution(k0):
    # a graph point (x0, l0) with k0 = l0^n; the evolved function takes value l1 at x1
    n, t, steps = 2, 0.1, 1000
    rng = np.random.default_rng(11)
    for seed in range(10):
        hs = random_polys(seed, XY, 2, coeffs=(-1, 1))
        ext, hk = extend_to_k(hs)
        X = nambu_vector_field(hk, ext.density)
        x0 = rng.uniform(-0.5, 0.5, 2)
        l0 = k0 ** (1 / n)
        base = sf("1 + x^2 + y^2")
        f = base * (l0 / base.evaluate(x0))
        end = integrate_flow(X, [*x0, k0], t, steps).endpoint
        value = evolve_graph(ext.base, f, end[:2], t, steps)
        assert end[2] ** (1 / n) == pytest.approx(value, abs=1e-6)


def test_extension_flow_check():
    spec = RandomFieldSpec(2, 2, coeff_range=(-1, 1), count=3, seed=0)
    assert check_extension_flow(spec).verdict == PASS
    assert check_extension_flow(spec, l0=0.5 ** 0.5).verdict == PASS


def test_embedding_check():
    assert check_embedding(RandomFieldSpec(2, 2, count=5, seed=1)).verdict == PASS


# --- one-homogeneous extension --------------------------------------------

def test_homogeneous_extension_examples():
    x, y, one = sf("x"), sf("y"), sf("1")
    assert str(modified_from_extension([x, y, one])) == "1"
    f, g = sf("x^2*y + y"), sf("x - y^3")
    assert (modified_from_extension([one, f, g]) - poisson(f, g)).poly.is_zero()


def test_homogeneous_extension_lift_and_scaling():
    ext = HomogeneousExtension(XY)
    assert ext.coords == ("x", "y", "y1")
    F = ext.lift(sf("x + y^2"))
    assert str(F) == "y^2*y1 + x*y1"
    assert (ext.scaled(F, 3) - F * 3).poly.is_zero()
    assert str(ext.restrict(F)) == "y^2 + x"


@settings(max_examples=15, deadline=None)
@given(seeds, st.sampled_from([XY, XYZ]))
def test_extension_reproduces_modified_bracket(seed, coords):
    fs = random_polys(seed, coords, len(coords) + 1)
    assert (modified_from_extension(fs) - modified_nambu(fs)).poly.is_zero()


def test_extended_bracket_is_homogeneous():
    ext = HomogeneousExtension(XY)
    fs = random_polys(7, XY, 3)
    B = ext.bracket(fs)
    for lam in (2, Fraction(1, 3)):
        assert (ext.scaled(B, lam) - B * lam).poly.is_zero()
    at1 = B.evaluate((0.3, -0.6, 1.0))
    assert B.evaluate((0.3, -0.6, 2.0)) == pytest.approx(2 * at1, rel=1e-12)


@pytest.mark.parametrize("dim", [2, 3])
def test_homogeneity_check(dim):
    assert check_homogeneity(RandomFieldSpec(dim, 2, count=3, seed=2)).verdict == PASS


def test_extension_arity():
    with pytest.raises(BracketError):
        modified_from_extension([sf("x"), sf("y")])


# --- cyclic cocycle -------------------------------------------------------

def test_cocycle_separable_example_vanishes():
    v = cyclic_cocycle([sf("1"), sf("sin(x)"), sf("cos(y)")])
    assert abs(v.tau) < 1e-12 and abs(v.raw_integral) < 1e-12


def test_cocycle_against_sympy():
    texts = ["sin(x)*sin(y) + 2", "cos(x) + sin(y)", "sin(x)*cos(y) - cos(2*y)"]
    fs = [sf(t) for t in texts]
    X, Y = sp.symbols("x y")
    f0, f1, f2 = (sp.sympify(t.replace("^", "**"), locals={"x": X, "y": Y}) for t in texts)
    jac = sp.diff(f1, X) * sp.diff(f2, Y) - sp.diff(f1, Y) * sp.diff(f2, X)
    exact = float(sp.integrate(f0 * jac, (X, 0, 2 * sp.pi), (Y, 0, 2 * sp.pi)))
    v = cyclic_cocycle(fs)
    assert v.tau == pytest.approx(exact, abs=1e-9)
    # the integrated bracket is (n + 1) tau
    assert v.raw_integral == pytest.approx(3 * exact, abs=1e-9)
    assert v.bracket_integral == pytest.approx(exact, abs=1e-9)


def test_cocycle_repeated_argument():
    f = sf("sin(x) + cos(y)*sin(x)")
    v = cyclic_cocycle([f, f, sf("cos(y) + sin(2*x)")])
    assert abs(v.tau - v.bracket_integral) < 1e-8


def test_cocycle_cyclicity():
    import random
    rng = random.Random(4)
    for _ in range(10):
        f0, f1, f2 = (random_trig_polynomial(rng, XY) for _ in range(3))
        a = cyclic_cocycle([f0, f1, f2]).tau
        b = cyclic_cocycle([f2, f0, f1]).tau
        assert a == pytest.approx(b, abs=1e-8)


def test_cocycle_identity_check():
    spec = RandomFieldSpec(2, 2, count=50, seed=0)
    assert check_cocycle(spec).verdict == PASS
    # the literal 1/n normalisation is off by (n + 1)/n
    assert check_cocycle(spec, factor=Fraction(1, 2)).verdict == FAIL


def test_cocycle_grid_and_arity():
    with pytest.raises(ValueError):
        cyclic_cocycle([sf("1"), sf("sin(x)"), sf("cos(y)")], grid=8)
    with pytest.raises(BracketError):
        cyclic_cocycle([sf("1"), sf("sin(x)")])
