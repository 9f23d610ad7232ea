"""Re-centering the potential at its absolute minimum, u = x - xi.

Shifted multipliers are lambda*_k = -8 U^(k)(xi) / k!, with lambda*_0 =
-8 U(xi) carried separately so that alpha_bar = alpha - 8 U(xi).  Shifted
moments use the complete binomial sum, j = 0..k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .core import (Eigenstate, MomentSet, PolynomialPotential, derivative_coefficients,
                   eval_potential, eval_potential_derivative, validate_potential)
from .eigensolver import SolveOptions, solve
from .errors import NoInteriorMinimum
from .observables import fisher_direct, moments

SCAN_PANELS = 512
NEWTON_TOL = 1e-12


@dataclass(frozen=True)
class Minimum:
    xi: float
    U_min: float
    # True when another critical point reaches the same U within tolerance
    degenerate: bool = False
    candidates: tuple = ()


def _critical_point_bound(p: PolynomialPotential) -> float:
    # Cauchy bound: every root of U' lies in |x| <= 1 + max |c_j / c_lead|
    c = derivative_coefficients(p, 1)
    lead = c[-1]
    return 1.0 + float(np.max(np.abs(c[:-1] / lead))) if len(c) > 1 else 1.0


def _polish(p: PolynomialPotential, x: float) -> float:
    for _ in range(20):
        curv = eval_potential_derivative(p, x, 2)
        if curv == 0:
            break
        step = eval_potential_derivative(p, x, 1) / curv
        x -= step
        if abs(step) <= NEWTON_TOL * max(1.0, abs(x)):
            break
    return float(x)


def find_minimum(p: PolynomialPotential, panels: int = SCAN_PANELS) -> Minimum:
    """Absolute minimum of U over its real critical points.

    Sign changes of U' from - to + are bracketed on ``panels`` panels
    spanning the Cauchy bound of the critical points, then refined with
    Brent's method and polished by Newton.  Ties in U go to the smallest
    |xi|, then the leftmost.
    """
    validate_potential(p)
    R = _critical_point_bound(p)
    xs = np.linspace(-R, R, panels + 1)
    dU = eval_potential_derivative(p, xs, 1)
    candidates = []
    for i in range(panels):
        if dU[i] < 0 < dU[i + 1]:
            root = brentq(lambda x: eval_potential_derivative(p, x, 1), xs[i], xs[i + 1],
                          xtol=1e-15, rtol=4 * np.finfo(float).eps)
            candidates.append(_polish(p, root))
        elif dU[i] == 0:
            left = dU[:i][dU[:i] != 0]
            right = dU[i + 1:][dU[i + 1:] != 0]
            if left.size and right.size and left[-1] < 0 < right[0]:
                candidates.append(float(xs[i]))
    if not candidates:
        raise NoInteriorMinimum(f"no critical point with U' changing sign found in [-{R:g}, {R:g}]")

    values = [float(eval_potential(p, x)) for x in candidates]
    u_min = min(values)
    tie = 1e-12 * max(1.0, abs(u_min))
    tied = [x for x, v in zip(candidates, values) if v - u_min <= tie]
    smallest = min(abs(x) for x in tied)
    closest = [x for x in tied if abs(x) - smallest <= 1e-9 * max(1.0, smallest)]
    xi = min(closest)
    return Minimum(xi, float(eval_potential(p, xi)), len(tied) > 1, tuple(sorted(candidates)))


@dataclass(frozen=True)
class ShiftData:
    xi: float
    U_min: float
    lambdas_star: dict
    degenerate: bool = False
    alpha: float | None = None

    @property
    def alpha_bar(self) -> float:
        if self.alpha is None:
            raise ValueError("alpha_bar needs the eigenvalue alpha of the original potential")
        return self.alpha + self.lambdas_star[0]

    def potential(self, atol: float = 0.0) -> PolynomialPotential:
        """Re-centered potential sum_{k>=1} lambda*_k u^k (constant dropped)."""
        return PolynomialPotential({k: v for k, v in self.lambdas_star.items()
                                    if k >= 1 and abs(v) > atol})

    def to_dict(self) -> dict:
        out = {"xi": self.xi, "U_min": self.U_min, "degenerate_minimum": self.degenerate,
               "lambdas_star": {str(k): v for k, v in self.lambdas_star.items()}}
        if self.alpha is not None:
            out["alpha"] = self.alpha
            out["alpha_bar"] = self.alpha_bar
        return out


def shifted_multipliers(p: PolynomialPotential, alpha: float | None = None,
                        minimum: Minimum | None = None) -> ShiftData:
    minimum = minimum or find_minimum(p)
    xi = minimum.xi
    star = {0: -8.0 * minimum.U_min + 0.0}  # + 0.0 folds -0.0
    for k in range(1, p.M + 1):
        star[k] = -8.0 * float(eval_potential_derivative(p, xi, k)) / math.factorial(k) + 0.0
    return ShiftData(xi, minimum.U_min, star, minimum.degenerate, alpha)


def shifted_moments(m: MomentSet, xi: float, k_max: int | None = None) -> MomentSet:
    """<(x - xi)^k> from the original moments by the full binomial sum."""
    k_max = m.k_max if k_max is None else k_max
    out = {}
    for k in range(1, k_max + 1):
        out[k] = sum(math.comb(k, j) * (-xi) ** j * m[k - j] for j in range(k + 1))
    return MomentSet(out)


def shifted_state(s: Eigenstate, shift: ShiftData) -> Eigenstate:
    """The same samples on the grid u = x - xi, labelled with alpha_bar."""
    return Eigenstate(s.index, s.alpha + shift.lambdas_star[0], s.psi, s.grid.shifted(-shift.xi))


def direct_shifted_moment(s: Eigenstate, xi: float, k: int) -> float:
    return float(np.trapezoid((s.x - xi) ** k * s.psi**2, dx=s.grid.spacing))


@dataclass
class ShiftedIdentity:
    fisher: float
    fisher_shifted_grid: float
    alpha_bar: float
    rhs: float

    @property
    def residual(self) -> float:
        return abs(self.fisher - self.rhs) / max(abs(self.fisher), 1.0)

    @property
    def invariance_residual(self) -> float:
        return abs(self.fisher - self.fisher_shifted_grid) / max(abs(self.fisher), 1.0)

    def to_dict(self) -> dict:
        return {"fisher": self.fisher, "fisher_shifted_grid": self.fisher_shifted_grid,
                "alpha_bar": self.alpha_bar, "rhs": self.rhs, "residual": self.residual,
                "invariance_residual": self.invariance_residual}


def _shifted_moments_for(s: Eigenstate, shift: ShiftData) -> MomentSet:
    k_max = max(k for k in shift.lambdas_star)
    return shifted_moments(moments(s, max(k_max, 2)), shift.xi, max(k_max, 2))


def shifted_identity_check(s: Eigenstate, p: PolynomialPotential, shift: ShiftData) -> ShiftedIdentity:
    """I = alpha_bar + sum_{k>=1} lambda*_k <u^k>'."""
    mu = _shifted_moments_for(s, shift)
    alpha_bar = s.alpha + shift.lambdas_star[0]
    rhs = alpha_bar + sum(v * mu[k] for k, v in shift.lambdas_star.items() if k >= 1)
    return ShiftedIdentity(fisher_direct(s), fisher_direct(shifted_state(s, shift)), alpha_bar, rhs)


@dataclass
class ShiftedVirial:
    fisher: float
    virial_sum: float

    @property
    def residual(self) -> float:
        return abs(self.fisher - self.virial_sum) / max(abs(self.fisher), 1.0)

    def to_dict(self) -> dict:
        return {"fisher": self.fisher, "virial_sum": self.virial_sum, "residual": self.residual}


def shifted_virial_check(s: Eigenstate, p: PolynomialPotential, shift: ShiftData) -> ShiftedVirial:
    """I = -sum_{k>=1} (k/2) lambda*_k <u^k>'."""
    mu = _shifted_moments_for(s, shift)
    total = -sum(0.5 * k * v * mu[k] for k, v in shift.lambdas_star.items() if k >= 1)
    return ShiftedVirial(fisher_direct(s), total)


def shifted_fim_expression(m_shifted: MomentSet, constants: dict, zero_tol: float = 1e-12) -> float:
    """sum_{k>=2} (k/2) Cbar_k |<u^k>'|^(-2/k) over the supplied constants.

    With only Cbar_2 = 1 this is 1/sigma**2, the Cramer-Rao equality value.
    Vanishing shifted moments are skipped.
    """
    terms = []
    for k, cbar in sorted(constants.items()):
        if k < 2:
            continue
        mu = m_shifted[k]
        if abs(mu) <= zero_tol:
            continue
        terms.append(0.5 * k * cbar * abs(mu) ** (-2.0 / k))
    if not terms:
        raise ValueError("no nonvanishing shifted moment with a supplied constant")
    return float(sum(terms))


@dataclass
class RecenteredSpectrum:
    alpha: list
    alpha_bar_solved: list
    U_min: float

    @property
    def residual(self) -> float:
        return max(abs(a - 8.0 * self.U_min - b) / max(abs(a), 1.0)
                   for a, b in zip(self.alpha, self.alpha_bar_solved))

    def to_dict(self) -> dict:
        return {"alpha": list(self.alpha), "alpha_bar_solved": list(self.alpha_bar_solved),
                "U_min": self.U_min, "residual": self.residual}


def recentered_spectrum_check(p: PolynomialPotential, n_states: int = 1,
                              opts: SolveOptions | None = None,
                              shift: ShiftData | None = None) -> RecenteredSpectrum:
    """Solve the original and the re-centered potential independently and compare."""
    opts = replace(opts or SolveOptions(), n_states=n_states)
    shift = shift or shifted_multipliers(p)
    scale = max(1.0, max(abs(v) for v in p.lambdas.values()))
    original = solve(p, opts)
    recentered = solve(shift.potential(atol=1e-13 * scale), opts)
    return RecenteredSpectrum([s.alpha for s in original], [s.alpha for s in recentered], shift.U_min)
