import itertools

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from bracket_engine.brackets import (
    CONTACT_CANDIDATES, CONTACT_GROUPING, BracketError, JacobiStructure, NambuDensity,
    contact, determinant, jacobi, jacobi_residual, leibniz_determinant, modified_nambu,
    nambu, permutation_sign, poisson,
)
from bracket_engine.expr import ScalarField
from bracket_engine.vectorfield import VectorField

from conftest import XY, XYZ, random_polys, sf

seeds = st.integers(0, 10_000)


def to_sympy(f):
    syms = sympy.symbols(" ".join(f.coords))
    return sympy.sympify(str(f).replace("^", "**"), locals=dict(zip(f.coords, syms))), syms


# --- determinants ---------------------------------------------------------

def test_permutation_sign():
    assert permutation_sign((0, 1, 2)) == 1
    assert permutation_sign((1, 0, 2)) == -1
    assert permutation_sign((1, 2, 0)) == 1


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 4))
def test_laplace_matches_leibniz(seed, n):
    coords = ("x", "y")
    entries = random_polys(seed, coords, n * n, degree=1)
    rows = [[entries[i * n + j].poly for j in range(n)] for i in range(n)]
    assert (determinant(rows) - leibniz_determinant(rows)).is_zero()


# --- Poisson --------------------------------------------------------------

def test_poisson_canonical_pair():
    assert str(poisson(sf("x"), sf("y"))) == "1"


def test_poisson_x_squared_y():
    assert str(poisson(sf("x^2"), sf("y"))) == "2*x"


def test_poisson_odd_dimension():
    with pytest.raises(BracketError):
        poisson(sf("x", XYZ), sf("y", XYZ))


def test_poisson_four_dimensional_pairing():
    c = ("q1", "q2", "p1", "p2")
    assert str(poisson(sf("q2", c), sf("p2", c))) == "1"
    assert str(poisson(sf("q1", c), sf("p2", c))) == "0"


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_poisson_properties(seed):
    f, g, h = random_polys(seed, XY, 3, degree=3)
    assert poisson(f, f).poly.is_zero()
    assert (poisson(f, g) + poisson(g, f)).poly.is_zero()
    assert jacobi_residual(poisson, f, g, h).poly.is_zero()
    assert (poisson(f, g * h) - g * poisson(f, h) - h * poisson(f, g)).poly.is_zero()


def test_poisson_against_sympy():
    f, g = random_polys(3, XY, 2, degree=3)
    (sf_, (sx, sy)), (sg, _) = to_sympy(f), to_sympy(g)
    expected = sympy.diff(sf_, sx) * sympy.diff(sg, sy) - sympy.diff(sf_, sy) * sympy.diff(sg, sx)
    got, _ = to_sympy(poisson(f, g))
    assert sympy.expand(got - expected) == 0


# --- contact --------------------------------------------------------------

def test_contact_xy():
    assert str(contact(sf("x", XYZ), sf("y", XYZ))) == "1"


def test_contact_zx():
    assert str(contact(sf("z", XYZ), sf("x", XYZ))) == "-x"


def test_contact_even_dimension():
    with pytest.raises(BracketError):
        contact(sf("x"), sf("y"))


def test_contact_grouping_is_the_only_jacobi_candidate():
    triples = [random_polys(s, XYZ, 3, degree=3) for s in range(4)]
    ok = {k: all(jacobi_residual(b, *t).poly.is_zero() for t in triples)
          for k, b in CONTACT_CANDIDATES.items()}
    assert ok == {k: k == CONTACT_GROUPING for k in CONTACT_CANDIDATES}


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_contact_properties(seed):
    f, g, h = random_polys(seed, XYZ, 3, degree=3)
    assert contact(f, f).poly.is_zero()
    assert jacobi_residual(contact, f, g, h).poly.is_zero()
    # first-order operator in g plus a multiplier: {f, g^2} = 2g{f,g} - g^2 {f,1}
    one = ScalarField.constant(1, XYZ)
    assert (contact(f, g * g) - g * contact(f, g) * 2 + g * g * contact(f, one)).poly.is_zero()


def test_contact_not_leibniz():
    f, g, h = sf("z", XYZ), sf("x", XYZ), sf("y", XYZ)
    assert not (contact(f, g * h) - g * contact(f, h) - h * contact(f, g)).poly.is_zero()


def test_contact_five_dimensional_jacobi():
    c = ("x1", "x2", "y1", "y2", "z")
    f, g, h = random_polys(11, c, 3, degree=2)
    assert jacobi_residual(contact, f, g, h).poly.is_zero()


# --- Jacobi structures ----------------------------------------------------

def test_jacobi_symplectic_is_poisson():
    s = JacobiStructure.symplectic(XY)
    f, g = random_polys(5, XY, 2, degree=3)
    assert (jacobi(f, g, s) - poisson(f, g)).poly.is_zero()


def test_jacobi_pure_vector_field():
    s = JacobiStructure(((0, 0), (0, 0)), VectorField.parse(["1", "0"], XY))
    g = sf("x^3*y + y")
    assert str(jacobi(sf("1"), g, s)) == str(g.diff("x"))


def test_jacobi_antisymmetric():
    x = sf("x").expr
    s = JacobiStructure(((0, x), (-x, 0)), VectorField.parse(["y", "1"], XY))
    f = sf("x*y + y^2")
    assert jacobi(f, f, s).poly.is_zero()


def test_jacobi_structure_rejects_symmetric_eta():
    with pytest.raises(BracketError):
        JacobiStructure(((0, 1), (1, 0)), VectorField.zero(XY))


# --- Nambu ----------------------------------------------------------------

def test_nambu_identity_jacobian():
    assert str(nambu([sf(c, XYZ) for c in XYZ])) == "1"


def test_nambu_x_squared():
    assert str(nambu([sf("x^2", XYZ), sf("y", XYZ), sf("z", XYZ)])) == "2*x"


def test_nambu_repeated_argument():
    f, g = random_polys(1, XYZ, 2)
    assert nambu([f, f, g]).poly.is_zero()


def test_nambu_arity():
    with pytest.raises(BracketError):
        nambu([sf("x", XYZ), sf("y", XYZ)])
    with pytest.raises(BracketError):
        nambu([sf("x", XYZ), sf("y"), sf("y")])


def test_nambu_density():
    d = NambuDensity(sf("1 + x^2", XYZ))
    assert str(nambu([sf("x", XYZ), sf("y", XYZ), sf("z", XYZ)], d)) == "x^2 + 1"
    with pytest.raises(BracketError):
        NambuDensity(sf("x - x", XYZ))


def test_nambu_against_sympy_jacobian():
    fs = random_polys(9, XYZ, 3, degree=2)
    exprs = [to_sympy(f)[0] for f in fs]
    syms = sympy.symbols("x y z")
    expected = sympy.Matrix(exprs).jacobian(syms).det()
    got = to_sympy(nambu(fs))[0]
    assert sympy.expand(got - expected) == 0


def test_nambu_fundamental_identity_and_leibniz():
    for seed in range(3):
        f1, f2, g1, g2, g3, h = random_polys(seed, XYZ, 6)
        inner = nambu([g1, g2, g3])
        lhs = nambu([f1, f2, inner])
        rhs = (nambu([nambu([f1, f2, g1]), g2, g3]) + nambu([g1, nambu([f1, f2, g2]), g3])
               + nambu([g1, g2, nambu([f1, f2, g3])]))
        assert (lhs - rhs).poly.is_zero()
        assert (nambu([f1, f2, g1 * h]) - g1 * nambu([f1, f2, h]) - h * nambu([f1, f2, g1])).poly.is_zero()


# --- modified Nambu -------------------------------------------------------

def test_modified_unit_first_is_poisson():
    f, g = random_polys(2, XY, 2, degree=3)
    one = ScalarField.constant(1, XY)
    assert (modified_nambu([one, f, g]) - poisson(f, g)).poly.is_zero()


def test_modified_xy1():
    assert str(modified_nambu([sf("x"), sf("y"), sf("1")])) == "1"


def test_modified_leibniz_counterexample():
    x, y, one = sf("x"), sf("y"), sf("1")
    lhs = modified_nambu([x, y, one * one])
    predicted = one * modified_nambu([x, y, one]) + one * modified_nambu([x, y, one])
    assert str(lhs) == "1" and str(predicted) == "2"


def test_modified_one_dimensional():
    c = ("x",)
    assert str(modified_nambu([sf("x", c), sf("x^2", c)])) == "x^2"


def test_modified_arity():
    with pytest.raises(BracketError):
        modified_nambu([sf("x"), sf("y")])


@settings(max_examples=15, deadline=None)
@given(seeds, st.sampled_from([XY, XYZ]))
def test_modified_totally_antisymmetric(seed, coords):
    n = len(coords)
    fs = random_polys(seed, coords, n + 1)
    value = modified_nambu(fs)
    for i, j in itertools.combinations(range(n + 1), 2):
        swapped = list(fs)
        swapped[i], swapped[j] = swapped[j], swapped[i]
        assert (value + modified_nambu(swapped)).poly.is_zero()


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_modified_fundamental_identity_n2(seed):
    h1, h2, f, g, h = random_polys(seed, XY, 5)
    lhs = modified_nambu([h1, h2, modified_nambu([f, g, h])])
    rhs = (modified_nambu([modified_nambu([h1, h2, f]), g, h])
           + modified_nambu([f, modified_nambu([h1, h2, g]), h])
           + modified_nambu([f, g, modified_nambu([h1, h2, h])]))
    assert (lhs - rhs).poly.is_zero()


def test_modified_against_sympy():
    fs = random_polys(4, XY, 3, degree=2)
    ex = [to_sympy(f)[0] for f in fs]
    sx, sy = sympy.symbols("x y")

    def pb(a, b):
        return sympy.diff(a, sx) * sympy.diff(b, sy) - sympy.diff(a, sy) * sympy.diff(b, sx)

    expected = ex[0] * pb(ex[1], ex[2]) - ex[1] * pb(ex[0], ex[2]) + ex[2] * pb(ex[0], ex[1])
    assert sympy.expand(to_sympy(modified_nambu(fs))[0] - expected) == 0
