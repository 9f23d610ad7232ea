import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fisherlab.core import MomentSet, PolynomialPotential, eval_potential, eval_potential_derivative
from fisherlab.errors import MissingMoment
from fisherlab.observables import fisher_direct, moments
from fisherlab.translate import (direct_shifted_moment, find_minimum, recentered_spectrum_check,
                                 shifted_fim_expression, shifted_identity_check, shifted_moments,
                                 shifted_multipliers, shifted_state, shifted_virial_check)

from conftest import DOUBLE_WELL, HO, QUARTIC, SHIFTED_HO, TEST_POTENTIALS, solved


def P(lambdas):
    return PolynomialPotential(lambdas)


# -- minimum ------------------------------------------------------------------

@pytest.mark.parametrize("lambdas, xi, u_min", [(HO, 0.0, 0.0), (SHIFTED_HO, 1.0, -0.5)])
def test_find_minimum_examples(lambdas, xi, u_min):
    m = find_minimum(P(lambdas))
    assert m.xi == pytest.approx(xi, abs=1e-12)
    assert m.U_min == pytest.approx(u_min, abs=1e-12)
    assert not m.degenerate


def test_double_well_tie_break():
    m = find_minimum(P(DOUBLE_WELL))
    assert m.xi == pytest.approx(-0.5, abs=1e-12)
    assert m.U_min == pytest.approx(-1.0 / 16.0, abs=1e-14)
    assert m.degenerate
    assert m.candidates == pytest.approx((-0.5, 0.5))


def test_asymmetric_well_picks_global_minimum():
    # tilt the double well: the right-hand minimum drops below the left
    p = P({1: 0.5, 2: 4.0, 4: -8.0})
    m = find_minimum(p)
    assert m.xi > 0 and not m.degenerate
    assert all(eval_potential(p, c) >= m.U_min for c in m.candidates)


@settings(max_examples=60, deadline=None)
@given(st.floats(-5, 5), st.floats(0.1, 5), st.floats(-3, 3), st.floats(0.1, 4))
def test_minimum_is_critical_and_global(b, c2, c3, c4):
    p = P({1: b, 2: c2, 3: c3, 4: -c4})
    m = find_minimum(p)
    assert abs(eval_potential_derivative(p, m.xi, 1)) <= 1e-8 * max(1.0, abs(eval_potential_derivative(p, m.xi, 2)))
    R = 20.0
    grid = np.linspace(-R, R, 40001)
    assert m.U_min <= float(np.min(eval_potential(p, grid))) + 1e-9


# -- shifted multipliers and moments -----------------------------------------

def test_shifted_multipliers_shifted_ho():
    s = shifted_multipliers(P(SHIFTED_HO))
    assert s.lambdas_star[0] == pytest.approx(4.0)
    assert s.lambdas_star[1] == pytest.approx(0.0, abs=1e-12)
    assert s.lambdas_star[2] == pytest.approx(-4.0)
    assert s.potential() == P({2: -4.0})


@pytest.mark.parametrize("lambdas", [HO, QUARTIC])
def test_centred_potentials_unchanged(lambdas):
    s = shifted_multipliers(P(lambdas))
    assert s.xi == 0.0
    assert s.potential() == P(lambdas)
    assert s.lambdas_star[0] == 0.0


def test_alpha_bar():
    s = shifted_multipliers(P(SHIFTED_HO), alpha=0.0)
    assert s.alpha_bar == pytest.approx(4.0)
    with pytest.raises(ValueError):
        shifted_multipliers(P(SHIFTED_HO)).alpha_bar


def test_shifted_moments_gaussian_oracle():
    mu = shifted_moments(MomentSet({1: 1.0, 2: 1.5}), 1.0)
    assert mu[1] == pytest.approx(0.0)
    assert mu[2] == pytest.approx(0.5)
    assert mu[0] == 1.0


def test_shifted_moments_identity_at_zero():
    m = MomentSet({1: 0.1, 2: 0.7, 3: 0.2, 4: 1.1})
    assert shifted_moments(m, 0.0).to_dict() == pytest.approx(m.to_dict())


def test_shifted_moments_need_originals():
    with pytest.raises(MissingMoment):
        shifted_moments(MomentSet({1: 0.0}), 1.0, k_max=2)


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_shift_composition(a, b):
    m = MomentSet({1: 0.3, 2: 1.2, 3: 0.4, 4: 2.5})
    once = shifted_moments(m, a + b)
    twice = shifted_moments(shifted_moments(m, a), b)
    for k in range(1, 5):
        assert twice[k] == pytest.approx(once[k], rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("name", TEST_POTENTIALS)
def test_binomial_matches_direct_quadrature(name):
    lambdas = TEST_POTENTIALS[name]
    s = solved(lambdas)[0]
    xi = find_minimum(P(lambdas)).xi
    mu = shifted_moments(moments(s, 6), xi)
    for k in range(1, 7):
        assert mu[k] == pytest.approx(direct_shifted_moment(s, xi, k), rel=1e-8, abs=1e-8)


# -- shifted identities -------------------------------------------------------

def test_shifted_ho_identity_closed_form():
    s = solved(SHIFTED_HO)[0]
    shift = shifted_multipliers(P(SHIFTED_HO))
    r = shifted_identity_check(s, P(SHIFTED_HO), shift)
    assert r.alpha_bar == pytest.approx(4.0, abs=1e-6)
    assert r.fisher == pytest.approx(2.0, abs=1e-6)
    assert r.residual < 1e-5
    assert r.invariance_residual < 1e-8


@pytest.mark.parametrize("name", TEST_POTENTIALS)
def test_shifted_identity_and_virial(name):
    p = P(TEST_POTENTIALS[name])
    shift = shifted_multipliers(p)
    for s in solved(TEST_POTENTIALS[name], 2):
        assert shifted_identity_check(s, p, shift).residual < 1e-5
        assert shifted_virial_check(s, p, shift).residual < 1e-5


def test_shifted_state_relabels_grid():
    s = solved(SHIFTED_HO)[0]
    shift = shifted_multipliers(P(SHIFTED_HO))
    t = shifted_state(s, shift)
    assert t.x[0] == pytest.approx(s.x[0] - 1.0)
    assert fisher_direct(t) == fisher_direct(s)


@pytest.mark.parametrize("lambdas", [SHIFTED_HO, HO])
def test_frame_fisher_is_inverse_variance(lambdas):
    s = solved(lambdas)[0]
    shift = shifted_multipliers(P(lambdas))
    mu = shifted_moments(moments(s, 2), shift.xi)
    assert shifted_fim_expression(mu, {2: 1.0}) == pytest.approx(2.0, abs=1e-6)


def test_frame_fisher_quartic_with_fitted_constant():
    from fisherlab.ansatz import decade, fisher_powerlaw_check
    C4 = fisher_powerlaw_check(4, decade()).coefficient
    s = solved(QUARTIC)[0]
    mu = shifted_moments(moments(s, 4), 0.0)
    # keep only the quartic term, the sole constrained moment
    value = shifted_fim_expression(mu, {4: 2.0 * C4 / 4.0})
    assert value == pytest.approx(fisher_direct(s), rel=1e-3)


def test_frame_fisher_needs_a_usable_term():
    with pytest.raises(ValueError):
        shifted_fim_expression(MomentSet({1: 0.0, 2: 0.5, 3: 0.0, 4: 0.0}), {4: 1.0})
    with pytest.raises(MissingMoment):
        shifted_fim_expression(MomentSet({1: 0.0, 2: 0.5}), {4: 1.0})


@pytest.mark.parametrize("lambdas", [SHIFTED_HO, DOUBLE_WELL, {1: 2.0, 2: -4.0, 4: -8.0}])
def test_recentered_spectrum(lambdas):
    r = recentered_spectrum_check(P(lambdas), n_states=2)
    assert r.residual < 1e-6
