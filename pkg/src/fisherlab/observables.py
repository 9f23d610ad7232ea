"""Moments, Fisher information by three routes, virial and Cramer-Rao checks.

Quadrature is the trapezoid rule on the solver grid throughout, matching
the second-order stencil.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (Eigenstate, FisherTriple, MomentSet, PolynomialPotential,
                   eval_potential_derivative)


def _integrate(values: np.ndarray, dx: float) -> float:
    return float(np.trapezoid(values, dx=dx))


def moment(s: Eigenstate, k: int) -> float:
    """<x^k> under psi**2."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return _integrate(s.psi**2, s.grid.spacing)
    return _integrate(s.x**k * s.psi**2, s.grid.spacing)


def moments(s: Eigenstate, k_max: int) -> MomentSet:
    return MomentSet({k: moment(s, k) for k in range(1, k_max + 1)})


def moments_for(s: Eigenstate, p: PolynomialPotential) -> MomentSet:
    """Every moment the identity and virial routes need for ``p``."""
    return moments(s, max(p.M, 2))


def derivative(s: Eigenstate) -> np.ndarray:
    # central differences inside, second-order one-sided at the two ends
    return np.gradient(s.psi, s.grid.spacing, edge_order=2)


def fisher_direct(s: Eigenstate) -> float:
    """I = 4 * integral of psi'(x)**2."""
    dpsi = derivative(s)
    return 4.0 * _integrate(dpsi**2, s.grid.spacing)


def fisher_identity(s: Eigenstate, p: PolynomialPotential, m: MomentSet) -> float:
    """I = alpha + sum_k lambda_k <x^k>."""
    return s.alpha + sum(lam * m[k] for k, lam in p.lambdas.items())


def fisher_virial(p: PolynomialPotential, m: MomentSet) -> float:
    """I = -sum_k (k/2) lambda_k <x^k>, i.e. minus the dot product X . G."""
    return -sum(0.5 * k * lam * m[k] for k, lam in p.lambdas.items())


def fisher_all(s: Eigenstate, p: PolynomialPotential, m: MomentSet | None = None) -> FisherTriple:
    m = m if m is not None else moments_for(s, p)
    return FisherTriple(fisher_direct(s), fisher_identity(s, p, m), fisher_virial(p, m))


def second_derivative_expectation(p: PolynomialPotential, m: MomentSet) -> float:
    """<d^2/dx^2> = (1/8) sum_k k lambda_k <x^k>, from the virial theorem."""
    return sum(k * lam * m[k] for k, lam in p.lambdas.items()) / 8.0


@dataclass(frozen=True)
class VirialReport:
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs) / max(abs(self.lhs), 1.0)

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "residual": self.residual}


def virial_check(s: Eigenstate, p: PolynomialPotential) -> VirialReport:
    """Compare <-d^2/dx^2> (as the integral of psi'**2) with <x U'(x)>."""
    dx = s.grid.spacing
    lhs = _integrate(derivative(s) ** 2, dx)
    x = s.x
    rhs = _integrate(x * eval_potential_derivative(p, x, 1) * s.psi**2, dx)
    return VirialReport(lhs, rhs)


def variance(s: Eigenstate) -> float:
    mean = moment(s, 1)
    return moment(s, 2) - mean * mean


def cramer_rao_product(s: Eigenstate) -> float:
    """I * sigma**2, bounded below by one."""
    return fisher_direct(s) * variance(s)
