"""Characteristic flow of A = sum_k (1 + k/2) Lambda_k dA/dLambda_k.

Along a characteristic, Lambda_k(t) = Lambda_k e^{(2+k)t/2} and A(t) = A e^t.
The integral basis is

    b_{k-1} = |Lambda_k|^{2/(2+k)} / |Lambda_r|^{2/(2+r)},   k != r
    b_M     = |A| / |Lambda_r|^{2/(2+r)}

with reference power r = 1 when Lambda_1 != 0, otherwise the smallest
power with a nonzero multiplier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import PolynomialPotential
from .eigensolver import SolveOptions, solve
from .errors import AllZeroMultipliers


@dataclass(frozen=True)
class InvariantVector:
    """Flow invariants keyed by power, plus ``b_M`` for the alpha ratio."""

    ratios: dict
    b_M: float
    reference: int

    @property
    def reference_substituted(self) -> bool:
        return self.reference != 1

    def as_array(self) -> np.ndarray:
        return np.array([*self.ratios.values(), self.b_M])

    def to_dict(self) -> dict:
        return {"reference": self.reference, "b_M": self.b_M,
                "ratios": {str(k): v for k, v in self.ratios.items()}}


def _anchor(Lambda: dict) -> int:
    nonzero = sorted(k for k, v in Lambda.items() if v != 0)
    if not nonzero:
        raise AllZeroMultipliers("every multiplier is zero; the flow has no anchor")
    return nonzero[0]


def characteristic_invariants(Lambda: dict, A: float) -> InvariantVector:
    Lambda = dict(Lambda.lambdas) if isinstance(Lambda, PolynomialPotential) else dict(Lambda)
    r = _anchor(Lambda)
    ref = abs(Lambda[r]) ** (2.0 / (2 + r))
    ratios = {k: abs(v) ** (2.0 / (2 + k)) / ref for k, v in sorted(Lambda.items()) if k != r}
    return InvariantVector(ratios, abs(A) / ref, r)


def flow(Lambda: dict, A: float, t: float) -> tuple[dict, float]:
    """Closed-form point reached after flowing for time ``t``."""
    Lambda = dict(Lambda.lambdas) if isinstance(Lambda, PolynomialPotential) else dict(Lambda)
    return {k: v * math.exp(0.5 * (2 + k) * t) for k, v in Lambda.items()}, A * math.exp(t)


def scaled_potential(p: PolynomialPotential, s: float) -> PolynomialPotential:
    """lambda_k -> s^{(2+k)/2} lambda_k, the flow at t = ln s."""
    if not s > 0:
        raise ValueError(f"scale factor must be positive, got {s!r}")
    return PolynomialPotential({k: lam * s ** (0.5 * (2 + k)) for k, lam in p.lambdas.items()})


@dataclass(frozen=True)
class CovarianceResult:
    s: float
    n: int
    alpha: float
    alpha_scaled: float

    @property
    def residual(self) -> float:
        return abs(self.alpha_scaled - self.s * self.alpha) / (self.s * abs(self.alpha) + 1.0)

    def to_dict(self) -> dict:
        return {"s": self.s, "n": self.n, "alpha": self.alpha, "alpha_scaled": self.alpha_scaled,
                "residual": self.residual}


def _alpha(p: PolynomialPotential, n: int, opts: SolveOptions | None) -> float:
    return solve(p, replace(opts or SolveOptions(), n_states=n + 1))[n].alpha


def scaling_covariance_check(p: PolynomialPotential, s: float, n: int = 0,
                             opts: SolveOptions | None = None) -> CovarianceResult:
    """Solve at lambda and at s^{(2+k)/2} lambda; alpha should scale by s."""
    return CovarianceResult(float(s), n, _alpha(p, n, opts), _alpha(scaled_potential(p, s), n, opts))


@dataclass
class SurfaceResult:
    times: list
    b_M: list
    reference: int
    alphas: list

    @property
    def max_residual(self) -> float:
        # unit floor: a vanishing invariant (alpha = 0) has no relative scale
        b = np.asarray(self.b_M)
        return float(np.max(np.abs(b - b[0])) / max(abs(b[0]), 1.0))

    def to_dict(self) -> dict:
        return {"times": list(self.times), "b_M": list(self.b_M), "alphas": list(self.alphas),
                "reference": self.reference, "max_residual": self.max_residual}


def solution_surface_check(p: PolynomialPotential, times, n: int = 0,
                           opts: SolveOptions | None = None) -> SurfaceResult:
    """Along a flow orbit, |alpha| / |lambda_r|^{2/(2+r)} must stay constant."""
    times = [float(t) for t in times]
    if len(times) < 3:
        raise ValueError("need at least 3 flow times")
    b, alphas, ref = [], [], None
    for t in times:
        lam_t, _ = flow(p.lambdas, 1.0, t)
        alpha = _alpha(PolynomialPotential(lam_t), n, opts)
        inv = characteristic_invariants(lam_t, alpha)
        ref = inv.reference
        b.append(inv.b_M)
        alphas.append(alpha)
    return SurfaceResult(times, b, ref, alphas)
