import numpy as np
import pytest

from fisherlab.core import GridSpec, MomentSet, PolynomialPotential
from fisherlab.eigensolver import SolveOptions, solve, solve_on_grid
from fisherlab.errors import MissingMoment
from fisherlab.observables import (cramer_rao_product, fisher_all, fisher_direct, fisher_identity,
                                   fisher_virial, moment, moments, moments_for,
                                   second_derivative_expectation, variance, virial_check)

from conftest import DOUBLE_WELL, HO, QUARTIC, SHIFTED_HO, TEST_POTENTIALS, TWO_TERM, solved


# -- moments ------------------------------------------------------------------

def test_ho_second_moment():
    assert moment(solved(HO)[0], 2) == pytest.approx(0.5, abs=1e-7)


def test_ho_first_moment_vanishes():
    assert abs(moment(solved(HO)[0], 1)) < 1e-8


def test_quartic_fourth_moment_against_dense_grid():
    p = PolynomialPotential(QUARTIC)
    coarse, = solved(QUARTIC)
    g = coarse.grid
    dense = solve_on_grid(p, GridSpec(g.x_min, g.x_max, 4 * (g.n_points - 1) + 1))[0]
    assert moment(coarse, 4) == pytest.approx(moment(dense, 4), rel=1e-6)


def test_zeroth_moment_is_norm():
    assert moment(solved(QUARTIC)[0], 0) == pytest.approx(1.0, abs=1e-10)


def test_even_moments_positive():
    m = moments(solved(DOUBLE_WELL, 2)[1], 6)
    assert all(m[k] > 0 for k in (2, 4, 6))


def test_negative_moment_rejected():
    with pytest.raises(ValueError):
        moment(solved(HO)[0], -1)


def test_shifted_oscillator_gaussian_moments():
    s, = solved(SHIFTED_HO)
    assert moment(s, 1) == pytest.approx(1.0, abs=1e-7)
    assert moment(s, 2) == pytest.approx(1.5, abs=1e-7)


# -- Fisher information -------------------------------------------------------

@pytest.mark.parametrize("lam2, expected", [(-4.0, 2.0), (-64.0, 8.0)])
def test_ho_fisher_direct(lam2, expected):
    assert fisher_direct(solved({2: lam2})[0]) == pytest.approx(expected, abs=1e-5)


def test_hermite_excited_fisher():
    # I = 4 <p^2> = 2 omega (2n + 1)
    states = solved(HO, 3)
    for n, s in enumerate(states):
        assert fisher_direct(s) == pytest.approx(2.0 * (2 * n + 1), abs=1e-4)


def test_identity_and_virial_closed_forms():
    p = PolynomialPotential(HO)
    m = MomentSet({1: 0.0, 2: 0.5})

    class _S:
        alpha = 4.0
    assert fisher_identity(_S, p, m) == 2.0
    assert fisher_virial(p, m) == 2.0

    q = PolynomialPotential(SHIFTED_HO)
    gm = MomentSet({1: 1.0, 2: 1.5})

    class _T:
        alpha = 0.0
    assert fisher_identity(_T, q, gm) == 2.0
    assert fisher_virial(q, gm) == 2.0


def test_missing_moment_propagates():
    p = PolynomialPotential(QUARTIC)
    with pytest.raises(MissingMoment):
        fisher_virial(p, MomentSet({1: 0.0, 2: 0.3}))


@pytest.mark.parametrize("name", TEST_POTENTIALS)
def test_three_routes_agree(name):
    lambdas = TEST_POTENTIALS[name]
    p = PolynomialPotential(lambdas)
    for s in solved(lambdas, 3):
        t = fisher_all(s, p)
        assert t.max_spread < 1e-5
        assert t.direct > 0


def test_ho_triple_values():
    t = fisher_all(solved(HO)[0], PolynomialPotential(HO))
    np.testing.assert_allclose([t.direct, t.identity, t.virial], 2.0, atol=1e-6)


def test_spread_shrinks_under_refinement():
    p = PolynomialPotential(QUARTIC)
    spreads = [fisher_all(solve_on_grid(p, GridSpec(-4, 4, n))[0], p).max_spread for n in (401, 801)]
    assert spreads[1] < spreads[0] / 3


# -- virial and Cramer-Rao ----------------------------------------------------

def test_ho_virial_sides():
    r = virial_check(solved(HO)[0], PolynomialPotential(HO))
    assert r.lhs == pytest.approx(0.5, abs=1e-5)
    assert r.rhs == pytest.approx(0.5, abs=1e-5)


def test_quartic_virial():
    assert virial_check(solved(QUARTIC)[0], PolynomialPotential(QUARTIC)).residual < 1e-5


def test_ho_second_excited_virial():
    assert virial_check(solved(HO, 3)[2], PolynomialPotential(HO)).residual < 1e-4


@pytest.mark.parametrize("lambdas", [HO, QUARTIC, TWO_TERM, DOUBLE_WELL])
def test_second_derivative_expectation(lambdas):
    p = PolynomialPotential(lambdas)
    s = solved(lambdas)[0]
    m = moments_for(s, p)
    # <d^2/dx^2> = -<-d^2/dx^2> = -(integral of psi'^2)
    assert second_derivative_expectation(p, m) == pytest.approx(-virial_check(s, p).lhs, abs=1e-4)
    assert second_derivative_expectation(p, m) == pytest.approx(fisher_virial(p, m) / -4.0, rel=1e-12)


@pytest.mark.parametrize("lambdas", [HO, SHIFTED_HO])
def test_cramer_rao_equality_for_gaussians(lambdas):
    s = solved(lambdas, tol=1e-10, max_refinements=12)[0]
    assert cramer_rao_product(s) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("name", TEST_POTENTIALS)
def test_cramer_rao_bound(name):
    for s in solved(TEST_POTENTIALS[name], 3, tol=1e-10, max_refinements=12):
        assert cramer_rao_product(s) >= 1.0 - 1e-9


def test_variance_of_shifted_gaussian():
    assert variance(solved(SHIFTED_HO)[0]) == pytest.approx(0.5, abs=1e-7)
