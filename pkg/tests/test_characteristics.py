import math

import pytest
from hypothesis import given, settings, strategies as st

from fisherlab.characteristics import (characteristic_invariants, flow, scaled_potential,
                                       scaling_covariance_check, solution_surface_check)
from fisherlab.core import PolynomialPotential
from fisherlab.eigensolver import SolveOptions
from fisherlab.errors import AllZeroMultipliers

from conftest import HO, QUARTIC, SHIFTED_HO, TWO_TERM, solved


def test_invariant_with_linear_reference():
    inv = characteristic_invariants({1: -1.0, 2: -4.0}, 3.0)
    assert inv.reference == 1 and not inv.reference_substituted
    assert inv.ratios[2] == pytest.approx(2.0)
    assert inv.b_M == pytest.approx(3.0)


def test_reference_substitution_for_ho():
    alpha = solved(HO)[0].alpha
    inv = characteristic_invariants(PolynomialPotential(HO), alpha)
    assert inv.reference == 2 and inv.reference_substituted
    assert inv.ratios == {}
    assert inv.b_M == pytest.approx(2.0, abs=1e-7)


def test_all_zero_rejected():
    with pytest.raises(AllZeroMultipliers):
        characteristic_invariants({2: 0.0}, 1.0)


def test_flow_examples():
    assert flow({2: -4.0}, 3.0, 0.0) == ({2: -4.0}, 3.0)
    lam, A = flow({2: -4.0}, 1.0, math.log(4.0))
    assert lam[2] == pytest.approx(-64.0) and A == pytest.approx(4.0)


def test_scaled_potential_matches_flow():
    assert scaled_potential(PolynomialPotential(TWO_TERM), 2.0).lambdas == pytest.approx(
        flow(TWO_TERM, 1.0, math.log(2.0))[0])
    with pytest.raises(ValueError):
        scaled_potential(PolynomialPotential(HO), 0.0)


multipliers = st.dictionaries(st.integers(1, 8),
                              st.floats(-10, 10).filter(lambda v: abs(v) > 1e-3), min_size=1)
times = st.floats(-2, 2)


@settings(max_examples=200, deadline=None)
@given(multipliers, st.floats(0.1, 10), times, times)
def test_flow_composition(lambdas, A, t1, t2):
    lam12, A12 = flow(*flow(lambdas, A, t1), t2)
    lam, A_ = flow(lambdas, A, t1 + t2)
    assert A12 == pytest.approx(A_, rel=1e-12)
    for k in lambdas:
        assert lam12[k] == pytest.approx(lam[k], rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(multipliers, st.floats(0.1, 10), times)
def test_invariants_are_constant_along_flow(lambdas, A, t):
    before = characteristic_invariants(lambdas, A)
    after = characteristic_invariants(*flow(lambdas, A, t))
    assert after.reference == before.reference
    assert after.b_M == pytest.approx(before.b_M, rel=1e-12)
    for k in before.ratios:
        assert after.ratios[k] == pytest.approx(before.ratios[k], rel=1e-12)


@pytest.mark.parametrize("lambdas, s, n, tol", [(HO, 4.0, 0, 1e-6), (QUARTIC, 2.0, 0, 1e-5),
                                                (SHIFTED_HO, 3.0, 1, 1e-5)])
def test_scaling_covariance_examples(lambdas, s, n, tol):
    r = scaling_covariance_check(PolynomialPotential(lambdas), s, n)
    assert r.residual < tol


def test_ho_covariance_closed_form():
    r = scaling_covariance_check(PolynomialPotential(HO), 4.0)
    assert r.alpha_scaled == pytest.approx(16.0, abs=1e-6)


def test_covariance_residual_shrinks_with_tolerance():
    p = PolynomialPotential(TWO_TERM)
    loose = scaling_covariance_check(p, 2.0, opts=SolveOptions(target_tolerance=1e-4, initial_points=101))
    tight = scaling_covariance_check(p, 2.0)
    assert tight.residual < loose.residual


@pytest.mark.parametrize("lambdas, ts, tol", [(HO, (0.0, 0.5, 1.0), 1e-6),
                                              (QUARTIC, (0.0, math.log(2), math.log(4)), 1e-5),
                                              (TWO_TERM, (0.0, 0.5, 1.0), 1e-5)])
def test_solution_surface(lambdas, ts, tol):
    r = solution_surface_check(PolynomialPotential(lambdas), ts)
    assert r.max_residual < tol


def test_ho_surface_value():
    r = solution_surface_check(PolynomialPotential(HO), (0.0, 0.5, 1.0))
    assert r.b_M == pytest.approx([2.0] * 3, abs=1e-6)


def test_surface_needs_three_points():
    with pytest.raises(ValueError):
        solution_surface_check(PolynomialPotential(HO), (0.0, 1.0))
