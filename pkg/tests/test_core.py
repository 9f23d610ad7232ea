import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fisherlab.core import (CheckEntry, Eigenstate, FisherTriple, GridSpec, MomentSet,
                            PolynomialPotential, VerificationReport, derivative_coefficients,
                            eval_potential, eval_potential_derivative, is_confining,
                            relative_difference, validate_potential)
from fisherlab.errors import EmptyPotential, MissingMoment, NotConfining

from conftest import TEST_POTENTIALS, TWO_TERM


# -- validation ---------------------------------------------------------------

def test_harmonic_potential_is_valid():
    p = PolynomialPotential({2: -4})
    assert validate_potential(p) is p


@pytest.mark.parametrize("lambdas", [{3: -1}, {2: 4}, {1: 1}, {2: -4, 3: 1}])
def test_non_confining_rejected(lambdas):
    with pytest.raises(NotConfining):
        validate_potential(PolynomialPotential(lambdas))
    assert not is_confining(PolynomialPotential(lambdas))


def test_empty_potential_rejected():
    with pytest.raises(EmptyPotential):
        validate_potential(PolynomialPotential({}))
    with pytest.raises(EmptyPotential):
        validate_potential(PolynomialPotential({2: 0.0}))


@pytest.mark.parametrize("bad", [{0: 1.0}, {-1: 1.0}, {2: float("nan")}, {2: float("inf")}])
def test_bad_entries_rejected(bad):
    with pytest.raises(ValueError):
        PolynomialPotential(bad)


def test_potential_value_semantics():
    p = PolynomialPotential({2: -4, 4: 0.0})
    assert p.powers == (2,)
    assert p.M == 2
    assert p[1] == 0.0
    assert p == PolynomialPotential({2: -4.0})
    assert hash(p) == hash(PolynomialPotential({2: -4.0}))
    assert p.with_lambda(1, 8.0) == PolynomialPotential({1: 8, 2: -4})
    with pytest.raises(TypeError):
        p.lambdas[2] = 1.0


# -- evaluation ---------------------------------------------------------------

@pytest.mark.parametrize("lambdas, x, expected", [
    ({2: -4}, 1.0, 0.5),
    ({2: -4}, 0.0, 0.0),
    ({1: 8, 2: -4}, 1.0, -0.5),
])
def test_eval_potential_examples(lambdas, x, expected):
    assert eval_potential(PolynomialPotential(lambdas), x) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("lambdas, x, order, expected", [
    ({2: -4}, 1.0, 1, 1.0),
    ({2: -4}, 0.0, 2, 1.0),
    ({4: -8}, 2.0, 1, 32.0),
])
def test_derivative_examples(lambdas, x, order, expected):
    assert eval_potential_derivative(PolynomialPotential(lambdas), x, order) == pytest.approx(expected)


def test_derivative_beyond_degree_is_zero():
    p = PolynomialPotential({2: -4})
    assert eval_potential_derivative(p, 1.3, 3) == 0.0
    assert derivative_coefficients(p, 5).tolist() == [0.0]


def test_derivative_order_must_be_positive():
    with pytest.raises(ValueError):
        eval_potential_derivative(PolynomialPotential({2: -4}), 0.0, 0)


def _naive(lambdas, x):
    return -sum(lam * x**k for k, lam in lambdas.items()) / 8.0


@pytest.mark.parametrize("lambdas", [*TEST_POTENTIALS.values(), TWO_TERM])
def test_horner_matches_naive_on_test_potentials(lambdas):
    p = PolynomialPotential(lambdas)
    x = np.linspace(-5, 5, 201)
    naive = np.array([_naive(lambdas, xi) for xi in x])
    np.testing.assert_allclose(eval_potential(p, x), naive, rtol=1e-13, atol=1e-13)


multipliers = st.dictionaries(st.integers(1, 8), st.floats(-50, 50, allow_nan=False), min_size=1)


@settings(max_examples=200, deadline=None)
@given(multipliers, st.floats(-5, 5))
def test_horner_matches_naive(lambdas, x):
    p = PolynomialPotential(lambdas)
    scale = sum(abs(lam) * abs(x) ** k for k, lam in lambdas.items()) / 8.0
    assert eval_potential(p, x) == pytest.approx(_naive(lambdas, x), abs=1e-13 * max(scale, 1e-300) + 1e-300)


@settings(max_examples=100, deadline=None)
@given(multipliers, st.floats(-5, 5))
def test_first_derivative_matches_central_difference(lambdas, x):
    p = PolynomialPotential(lambdas)
    h = 1e-5
    fd = (eval_potential(p, x + h) - eval_potential(p, x - h)) / (2 * h)
    exact = eval_potential_derivative(p, x, 1)
    # truncation ~ h^2 U''' / 6 and rounding ~ eps |U| / h, bounded by the coefficient scale
    scale = sum(abs(lam) * k**3 * (abs(x) + 1) ** k for k, lam in lambdas.items()) / 8.0
    assert abs(fd - exact) <= 1e-8 * max(abs(exact), 1.0) + 1e-9 * scale


# -- grids and states ---------------------------------------------------------

def test_grid_spec():
    g = GridSpec(-10.0, 10.0, 5)
    assert g.spacing == 5.0
    assert g.points().tolist() == [-10, -5, 0, 5, 10]
    assert g.refined().n_points == 9 and g.refined().spacing == 2.5
    assert GridSpec.symmetric(3.0, 7) == GridSpec(-3.0, 3.0, 7)
    assert g.shifted(1.0).points()[0] == -9.0


@pytest.mark.parametrize("args", [(1.0, 0.0, 5), (0.0, 1.0, 2), (0.0, math.inf, 5)])
def test_grid_spec_invalid(args):
    with pytest.raises(ValueError):
        GridSpec(*args)


def test_eigenstate_helpers():
    g = GridSpec(-1.0, 1.0, 201)
    x = g.points()
    psi = np.sin(np.pi * (x + 1)) / 1.0
    s = Eigenstate(1, 8.0, psi, g)
    assert s.energy == 1.0
    assert s.sign_changes() == 1
    assert s.norm == pytest.approx(1.0, rel=1e-3)
    with pytest.raises(ValueError):
        s.psi[0] = 1.0


def test_moment_set():
    m = MomentSet({1: 0.0, 2: 0.5})
    assert m[0] == 1.0 and m[2] == 0.5 and m.k_max == 2
    with pytest.raises(MissingMoment):
        m[3]


def test_fisher_triple_spread():
    t = FisherTriple(2.0, 2.0 + 2e-6, 2.0 - 2e-6)
    assert t.max_spread == pytest.approx(4e-6 / (2.0 + 2e-6), rel=1e-9)
    assert relative_difference(2.0, 2.0) == 0.0


def test_verification_report():
    r = VerificationReport()
    r.add("a", 1e-6, 1e-5)
    r.add("b", 0.99, 1.0, bound="min")
    assert not r.passed
    assert [e.name for e in r.failures()] == ["b"]
    assert r["a"].passed
    assert not CheckEntry("c", math.nan, 1.0).passed
    d = r.to_dict()
    assert d["pass"] is False and d["entries"][0] == {"name": "a", "value": 1e-6, "tolerance": 1e-5,
                                                      "bound": "max", "pass": True}
