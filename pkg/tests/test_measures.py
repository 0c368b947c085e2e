import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sci_integrate

from gaussmeans.errors import DomainError
from gaussmeans.measures import (
    AtomicMeasure,
    DensityMeasure,
    GridMeasure,
    atom_at_origin,
    composition_measure,
    gaussian_density,
    growing_measure,
    lebesgue,
    load_measure,
    measure_from_json,
    polar_integral,
    volterra_measure,
    zero_measure,
)
from gaussmeans.polynomial import PowerSeriesFunction as P


def test_ball_mass_examples():
    assert atom_at_origin().ball_mass(0j, 1.0) == 1.0
    assert AtomicMeasure([3 + 0j], [5.0]).ball_mass(0j, 1.0) == 0.0
    for a in (0j, 2 - 1j, 7 + 7j):
        assert lebesgue().ball_mass(a, 1.3) == pytest.approx(math.pi * 1.3**2, rel=1e-6)


def test_boundary_atoms_count_inside():
    mu = AtomicMeasure([1 + 0j, 2 + 0j], [1.0, 2.0])
    assert mu.ball_mass(0j, 1.0) == 1.0
    assert mu.ball_masses(np.array([0j, 1 + 0j]), 1.0).tolist() == [1.0, 3.0]


def test_gaussian_ball_mass_closed_form():
    for r in (0.3, 1.0, 2.5):
        assert gaussian_density().ball_mass(0j, r) == pytest.approx(math.pi * (1 - math.exp(-r * r)), rel=1e-10)


def test_off_center_density_against_dblquad():
    a, r = 0.8 - 0.4j, 1.1
    ref, _ = sci_integrate.dblquad(
        lambda t, s: s * math.exp(-abs(a + s * complex(math.cos(t), math.sin(t))) ** 2),
        0, r, 0, 2 * math.pi, epsabs=0, epsrel=1e-12)
    assert gaussian_density().ball_mass(a, r) == pytest.approx(ref, rel=1e-9)


def test_polar_integral_examples():
    assert polar_integral(lambda z: np.ones(z.shape), 1j, 2.0) == pytest.approx(4 * math.pi, rel=1e-12)
    assert polar_integral(lambda z: np.abs(z) ** 2, 0j, 1.0) == pytest.approx(math.pi / 2, rel=1e-12)


def test_density_validation():
    with pytest.raises(DomainError):
        lebesgue().ball_mass(0j, 0.0)
    with pytest.raises(DomainError):
        lebesgue().integrate(lambda z: np.ones(z.shape))
    with pytest.raises(DomainError):
        AtomicMeasure([0j], [-1.0])


def test_zero_and_growing_measures():
    assert zero_measure().ball_mass(0j, 5.0) == 0.0
    mu = growing_measure(1, 2.0, s=1.0, radius=3.0)
    for p, w in zip(mu.points, mu.weights):
        assert w == pytest.approx((1 + abs(p)) ** 3)
    assert mu.support_radius <= 3.0


def test_grid_measure_examples():
    g = GridMeasure(0.05, (-3.0, -3.0), np.ones((120, 120)))
    assert g.ball_mass(0.3 + 0.1j, 1.0) == pytest.approx(math.pi, rel=1e-12)
    assert g.ball_mass(10 + 0j, 1.0) == 0.0
    # one cell of mass h^2 * v, lower-left corner at origin + (col, row) * h
    one = GridMeasure(1.0, (0.0, 0.0), [[0.0, 2.0]])
    assert one.ball_mass(1.5 + 0.5j, 0.01) == pytest.approx(2 * math.pi * 1e-4, rel=1e-12)
    assert one.ball_mass(1.5 + 0.5j, 2.0) == pytest.approx(2.0, rel=1e-12)


def test_composition_measure_examples():
    ident = composition_measure(1, 0, 2.0)
    z = np.array([0.5 + 1j, 2.0])
    assert np.allclose(ident.density(z), np.exp(-np.abs(z) ** 2), rtol=1e-15)
    dbl = composition_measure(2, 0, 2.0)
    assert np.allclose(dbl.density(z), 0.25 * np.exp(-np.abs(z) ** 2 / 4), rtol=1e-15)
    shifted = composition_measure(1, 5, 2.0)
    assert shifted.density(np.array([5 + 0j]))[0] == 1.0
    with pytest.raises(DomainError):
        composition_measure(0, 1, 2.0)


def test_volterra_measure_examples():
    lin = volterra_measure(P([0, 1]), 2.0)
    z = np.array([0j, 1 + 1j, 3.0])
    assert np.allclose(lin.density(z), (1 + np.abs(z)) ** -2.0)
    sq = volterra_measure(P([0, 0, 1]), 2.0)
    assert np.allclose(sq.density(z), (2 * np.abs(z) / (1 + np.abs(z))) ** 2)
    assert np.all(sq.density(np.linspace(0, 100, 50) + 0j) <= 4)
    const = volterra_measure(P([3.0]), 2.0)
    assert const.ball_mass(0j, 10.0) == 0.0


# --- JSON ------------------------------------------------------------------------

def test_json_atoms_and_grid(tmp_path):
    mu = measure_from_json({"atoms": [[0, 0, 1.0], [1, 1, 0.5]]})
    assert mu.ball_mass(0j, 2.0) == 1.5
    path = tmp_path / "grid.json"
    path.write_text(json.dumps({"grid": {"cell": 0.5, "origin": [-1, -1], "values": [[1, 1, 1, 1]] * 4}}))
    g = load_measure(path)
    assert g.ball_mass(0j, 10.0) == pytest.approx(4.0)


@pytest.mark.parametrize("doc", [
    {},
    {"atoms": [[0, 0]]},
    {"atoms": [[0, 0, -1]]},
    {"grid": {"cell": 0, "origin": [0, 0], "values": [[1]]}},
    {"grid": {"cell": 1, "origin": [0, 0], "values": [[1, 2], [3]]}},
    {"atoms": [], "grid": {"cell": 1, "origin": [0, 0], "values": [[1]]}},
])
def test_json_rejects_bad_documents(doc):
    with pytest.raises(DomainError):
        measure_from_json(doc)


def test_load_measure_errors(tmp_path):
    with pytest.raises(DomainError):
        load_measure(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(DomainError):
        load_measure(bad)


# --- properties ------------------------------------------------------------------

dyadic = st.integers(1, 2**10).map(lambda n: n / 2**6)
point = st.tuples(st.integers(-20, 20), st.integers(-20, 20)).map(lambda t: complex(t[0] / 4, t[1] / 4))


@settings(max_examples=60)
@given(st.lists(st.tuples(point, dyadic), min_size=1, max_size=12), st.lists(st.tuples(point, dyadic), max_size=12),
       point, st.floats(0.1, 6))
def test_ball_mass_additivity(atoms_a, atoms_b, a, r):
    A = AtomicMeasure([p for p, _ in atoms_a], [w for _, w in atoms_a])
    B = AtomicMeasure([p for p, _ in atoms_b], [w for _, w in atoms_b])
    assert A.union(B).ball_mass(a, r) == A.ball_mass(a, r) + B.ball_mass(a, r)


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.2, 2))
def test_lebesgue_translation_invariant(x, y, r):
    assert lebesgue().ball_mass(complex(x, y), r) == pytest.approx(math.pi * r * r, rel=1e-9)


def test_density_measure_is_immutable():
    mu = DensityMeasure(lambda z: np.ones(z.shape))
    with pytest.raises(AttributeError):
        mu.support_radius = 1.0


@settings(max_examples=40, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.01, 1.9), st.floats(0.05, 0.5))
def test_uniform_grid_ball_mass_is_disc_area(x, y, r, h):
    n = int(math.ceil(6 / h))
    g = GridMeasure(h, (-3.0, -3.0), np.full((n, n), 2.0))
    assert g.ball_mass(complex(x, y), r) == pytest.approx(2 * math.pi * r * r, rel=1e-12)
