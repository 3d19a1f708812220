import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bracket_engine.brackets import modified_nambu, nambu, poisson
from bracket_engine.dynamics import (
    GRAPH, PULLBACK, BlowUpError, GeneratorT, apply_generator,
    automorphism_from_vector_field, characteristic, divergence, evolve_batch,
    evolve_graph, evolve_pullback, hamiltonian_vector_field, integrate_flow,
    modified_generator, nambu_vector_field, pullback_jet,
)
from bracket_engine.vectorfield import VectorField
from bracket_engine.verify import canonicity_residuals, derivation_residual, norm_drift

from conftest import XY, XYZ, random_polys, sf

seeds = st.integers(0, 10_000)


def vf(comps, coords=XY):
    return VectorField.parse(comps, coords)


# --- vector fields --------------------------------------------------------

def test_hamiltonian_field_of_x():
    assert hamiltonian_vector_field(sf("x")).polys == vf(["0", "1"]).polys


def test_hamiltonian_field_odd_dimension():
    with pytest.raises(ValueError):
        hamiltonian_vector_field(sf("x", XYZ))


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_hamiltonian_field_properties(seed):
    H, f = random_polys(seed, XY, 2, degree=3)
    X = hamiltonian_vector_field(H)
    assert X.apply(H).poly.is_zero()
    assert divergence(X).poly.is_zero()
    assert (X.apply(f) - poisson(H, f)).poly.is_zero()


def test_nambu_field_translation():
    X = nambu_vector_field([sf("x", XYZ), sf("y", XYZ)])
    assert [str(c) for c in X.components] == ["0", "0", "1"]


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_nambu_field_conserves_and_preserves_volume(seed):
    h1, h2, f = random_polys(seed, XYZ, 3)
    X = nambu_vector_field([h1, h2])
    assert X.apply(h1).poly.is_zero() and X.apply(h2).poly.is_zero()
    assert divergence(X).poly.is_zero()
    assert (X.apply(f) - nambu([h1, h2, f])).poly.is_zero()


def test_nambu_field_arity():
    with pytest.raises(ValueError):
        nambu_vector_field([sf("x", XYZ)])


def test_divergence_examples():
    assert str(divergence(vf(["1", "0"]))) == "0"
    assert str(divergence(vf(["x", "y"]))) == "2"


# --- generators -----------------------------------------------------------

def test_modified_generator_example():
    T = modified_generator([sf("x^2"), sf("y")])
    assert [str(c) for c in T.L.components] == ["-x^2", "-2*x*y"]
    assert str(T.H) == "2*x"
    assert str(divergence(T.L)) == "-4*x"


def test_modified_generator_pure_hamiltonian():
    G = sf("x^2*y - y^3 + x")
    T = modified_generator([sf("1"), G])
    assert T.L.polys == hamiltonian_vector_field(G).polys
    assert T.H.poly.is_zero()


def test_modified_generator_odd_dimension_sign():
    T = modified_generator([sf("x^2", XYZ), sf("y", XYZ), sf("z", XYZ)])
    assert [str(c) for c in T.L.components] == ["x^2", "2*x*y", "2*x*z"]
    assert str(T.H) == "-2*x"


@settings(max_examples=15, deadline=None)
@given(seeds, st.sampled_from([XY, XYZ]))
def test_generator_compatibility(seed, coords):
    hs = random_polys(seed, coords, len(coords))
    T = modified_generator(hs)
    assert T.is_compatible()
    f = random_polys(seed + 1, coords, 1)[0]
    assert (apply_generator(T, f) - modified_nambu(hs + [f])).poly.is_zero()


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_generator_is_a_derivation(seed):
    hs = random_polys(seed, XY, 5)
    assert derivation_residual(modified_generator(hs[:2]), hs[2:]).poly.is_zero()


def test_generator_derivation_n3():
    hs = random_polys(42, XYZ, 7)
    assert derivation_residual(modified_generator(hs[:3]), hs[3:]).poly.is_zero()


def test_apply_generator_examples():
    T = GeneratorT(vf(["1", "0"]), sf("0"))
    assert str(apply_generator(T, sf("x^2"))) == "2*x"
    T = GeneratorT(VectorField.zero(XY), sf("3"))
    f = sf("x*y + 1")
    assert str(apply_generator(T, f)) == "3*x*y + 3"
    T = modified_generator([sf("x^2"), sf("y")])
    assert (apply_generator(T, sf("x*y")) - modified_nambu([sf("x^2"), sf("y"), sf("x*y")])).poly.is_zero()


def test_automorphism_examples():
    assert str(automorphism_from_vector_field(vf(["x", "0"])).H) == "-1/2"
    T = automorphism_from_vector_field(vf(["-y", "x"]))
    assert T.H.poly.is_zero()


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_automorphism_is_a_derivation(seed):
    a, b, f, g, h = random_polys(seed, XY, 5, degree=3)
    T = automorphism_from_vector_field(VectorField((a.expr, b.expr), XY))
    assert T.is_compatible()
    assert derivation_residual(T, [f, g, h]).poly.is_zero()


# --- trajectories ---------------------------------------------------------

def test_translation_flow():
    X = nambu_vector_field([sf("x", XYZ), sf("y", XYZ)])
    end = integrate_flow(X, (0, 0, 0), 1.0, 10).endpoint
    assert end == pytest.approx((0, 0, 1), abs=1e-10)


def test_rotation_returns():
    traj = integrate_flow(vf(["-y", "x"]), (1, 0), 2 * math.pi, 1000)
    assert np.allclose(traj.endpoint, (1, 0), atol=1e-6)
    assert np.all(np.diff(traj.times) > 0)
    assert np.all(traj.log_amplitude == 0)


def test_zero_time_is_identity():
    traj = integrate_flow(vf(["-y", "x"]), (0.3, 0.7), 0.0, 5)
    assert traj.endpoint == (0.3, 0.7)
    assert len(traj.times) == 1


def test_flow_preconditions():
    with pytest.raises(ValueError):
        integrate_flow(vf(["1", "0"]), (0, 0), 1.0, 0)
    with pytest.raises(ValueError):
        integrate_flow(vf(["1", "0"]), (0, 0), -1.0, 3)


def test_blow_up_reports_last_time():
    # dx/dt = x^2 from x = 1 escapes at t = 1
    with pytest.raises(BlowUpError) as info:
        integrate_flow(VectorField.parse(["x^2"], ("x",)), (1.0,), 2.0, 2000)
    assert 0.9 < info.value.last_time < 1.1
    traj = info.value.trajectory
    assert np.isfinite(traj.states).all()


def test_csv_format():
    traj = integrate_flow(vf(["1", "0"]), (0, 0), 0.5, 2)
    text = traj.to_csv()
    lines = text.splitlines()
    assert lines[0] == "t,x,y,log_amp"
    assert lines[1] == "0,0,0,0"
    assert lines[2] == "0.25,0.25,0,0"
    buf = io.StringIO()
    traj.write_csv(buf)
    assert buf.getvalue() == text


def test_csv_has_17_significant_digits():
    traj = integrate_flow(vf(["1", "0"]), (0.1, 0), 0.1, 1)
    assert traj.to_csv().splitlines()[-1].split(",")[1] == "0.20000000000000001"


# --- evolution ------------------------------------------------------------

def test_graph_pure_multiplier():
    T = GeneratorT(VectorField.zero(XY), sf("3/2"))
    f = sf("1 + x^2")
    assert evolve_graph(T, f, (0.5, 0), 0.4) == pytest.approx(1.25 * math.exp(0.6), rel=1e-12)
    assert evolve_pullback(T, f, (0.5, 0), 0.4) == pytest.approx(1.25 * math.exp(0.6), rel=1e-12)


def test_graph_translation_moves_forward():
    T = GeneratorT(vf(["1", "0"]), sf("0"))
    f = sf("exp(-x^2)*(1 + y)")
    p = (0.7, 0.2)
    assert evolve_graph(T, f, p, 0.5) == pytest.approx(f.evaluate((0.2, 0.2)), abs=1e-8)
    assert evolve_pullback(T, f, p, 0.5) == pytest.approx(f.evaluate((1.2, 0.2)), abs=1e-8)


def test_evolution_at_zero_time():
    T = modified_generator([sf("x^2"), sf("y")])
    f = sf("x + y^2")
    for fn in (evolve_graph, evolve_pullback):
        assert fn(T, f, (0.3, 0.4), 0.0) == f.evaluate((0.3, 0.4))


def test_pullback_without_multiplier_is_composition():
    X = vf(["-y", "x"])
    T = GeneratorT(X, sf("0"))
    f = sf("x^3 + y")
    end = integrate_flow(X, (0.4, 0.1), 0.3, 100).endpoint
    assert evolve_pullback(T, f, (0.4, 0.1), 0.3) == pytest.approx(f.evaluate(end), rel=1e-12)


def test_unknown_semantics():
    T = modified_generator([sf("x^2"), sf("y")])
    with pytest.raises(ValueError):
        characteristic(T, (0, 0), 0.1, 10, "forward")


def test_batch_matches_pointwise():
    T = modified_generator([sf("x^2"), sf("y")])
    f = sf("(1 + x*y)*exp(-(x^2 + y^2))")
    pts = np.random.default_rng(0).uniform(-1, 1, (6, 2))
    for sem, fn in ((GRAPH, evolve_graph), (PULLBACK, evolve_pullback)):
        batch = evolve_batch(T, f, pts, 0.2, 50, sem)
        single = [fn(T, f, p, 0.2, 50) for p in pts]
        assert np.allclose(batch, single, rtol=1e-13, atol=0)


def test_batch_escape_policy():
    T = modified_generator([sf("x^2"), sf("y")])
    f = sf("exp(-(x^2 + y^2))")
    pts = np.array([[0.0, 0.0], [5.5, 0.0]])
    with pytest.raises(BlowUpError):
        evolve_batch(T, f, pts, 0.2, 100, GRAPH)
    vals = evolve_batch(T, f, pts, 0.2, 100, GRAPH, escape="zero")
    assert vals[1] == 0.0 and vals[0] > 0


def test_pullback_jet_matches_finite_differences():
    T = modified_generator([sf("x^2 + y"), sf("x*y")])
    f = sf("x - y^2 + x*y")
    pts = np.array([[0.2, -0.3], [0.5, 0.1]])
    vals, grads = pullback_jet(T, f, pts, 0.1, 200)
    assert np.allclose(vals, evolve_batch(T, f, pts, 0.1, 200, PULLBACK), rtol=1e-13)
    h = 1e-6
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd = (evolve_batch(T, f, pts + e, 0.1, 200, PULLBACK)
              - evolve_batch(T, f, pts - e, 0.1, 200, PULLBACK)) / (2 * h)
        assert np.allclose(grads[:, j], fd, atol=1e-7)


def test_integrated_fundamental_identity():
    T = modified_generator([sf("x^2"), sf("y")])
    fs = [sf("x*y + 1"), sf("y^2 - x"), sf("x + 3*y^2")]
    pts = np.random.default_rng(1).uniform(-1, 1, (10, 2))
    assert np.abs(canonicity_residuals("modified_nambu", T, fs, pts, 0.1)).max() < 1e-6


def test_nambu_translation_canonicity_exact():
    X = nambu_vector_field([sf("x", XYZ), sf("y", XYZ)])
    T = GeneratorT(X, sf("0", XYZ))
    fs = [sf("x*z", XYZ), sf("y^2 + z", XYZ), sf("x + z^2", XYZ)]
    pts = np.random.default_rng(2).uniform(-1, 1, (10, 3))
    assert np.abs(canonicity_residuals("nambu", T, fs, pts, 0.1)).max() < 1e-9
    assert np.abs(canonicity_residuals("nambu", T, fs, pts, 0.0)).max() < 1e-12


# --- norms ----------------------------------------------------------------

def test_norm_graph_n2():
    drift, before, after = norm_drift(2, 0.2, GRAPH)
    assert drift < 1e-4


def test_norm_pullback_changes():
    drift, before, after = norm_drift(2, 0.2, PULLBACK)
    assert drift > 10 * 1e-4
    assert after > before


def test_norm_zero_time():
    assert norm_drift(2, 0.0, GRAPH)[0] == 0.0


@pytest.mark.slow
def test_norm_graph_n3():
    drift, _, _ = norm_drift(3, 0.2, GRAPH)
    assert drift < 1e-3
