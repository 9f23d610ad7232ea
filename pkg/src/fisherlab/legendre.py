"""Finite differences over multiplier space, lambda -> alpha(lambda).

Every derivative re-solves the eigenproblem at perturbed multipliers on
the grid that was converged for the base potential.  Keeping the grid
fixed makes alpha a smooth function of the multipliers, so central
differences show their h**2 truncation instead of refinement jitter.
States are matched by index.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import GridSpec, MomentSet, PolynomialPotential, is_confining, validate_potential
from .eigensolver import SolveOptions, solve_on_grid, solve_with_history
from .errors import PerturbationBreaksConfinement, SingularJacobian
from .observables import fisher_direct, moment, moments_for


@dataclass(frozen=True)
class FDConfig:
    relative_step: float = 1e-4
    hessian_step: float = 1e-3
    scheme: str = "central"

    def __post_init__(self):
        if not (self.relative_step > 0 and self.hessian_step > 0):
            raise ValueError("finite-difference steps must be positive")
        if self.scheme != "central":
            raise ValueError(f"unsupported scheme {self.scheme!r}")

    def step(self, lam: float, hessian: bool = False) -> float:
        rel = self.hessian_step if hessian else self.relative_step
        return rel * max(abs(lam), 1.0)


@dataclass(frozen=True)
class LegendrePair:
    """One point {alpha, lambda_k} <-> {I, <x^k>} of the dual description."""

    alpha: float
    lambdas: dict
    moments: MomentSet
    fisher: float


@dataclass(frozen=True)
class LambdaMatrix:
    """Square matrix indexed by multiplier powers."""

    powers: tuple
    values: np.ndarray

    def entry(self, k: int, l: int) -> float:
        return float(self.values[self.powers.index(k), self.powers.index(l)])

    def to_dict(self) -> dict:
        return {"powers": list(self.powers), "values": self.values.tolist()}


class SpectrumProbe:
    """Re-solves state ``n`` for nearby potentials on one frozen grid."""

    def __init__(self, p: PolynomialPotential, n: int = 0, grid: GridSpec | None = None,
                 solve_options: SolveOptions | None = None):
        self.base = validate_potential(p)
        self.n = n
        if grid is None:
            opts = replace(solve_options or SolveOptions(), n_states=n + 1)
            grid = solve_with_history(p, opts).grid
        self.grid = grid
        self._cache = {}

    def state(self, q: PolynomialPotential):
        if q not in self._cache:
            self._cache[q] = solve_on_grid(q, self.grid, self.n + 1)[self.n]
        return self._cache[q]

    def alpha(self, q: PolynomialPotential) -> float:
        return self.state(q).alpha

    def moment(self, q: PolynomialPotential, k: int) -> float:
        return moment(self.state(q), k)

    def fisher(self, q: PolynomialPotential) -> float:
        return fisher_direct(self.state(q))

    def perturbed(self, k: int, h: float) -> tuple[PolynomialPotential, PolynomialPotential]:
        lam = self.base[k]
        plus, minus = self.base.with_lambda(k, lam + h), self.base.with_lambda(k, lam - h)
        if not (is_confining(plus) and is_confining(minus)):
            raise PerturbationBreaksConfinement(k, h)
        return plus, minus

    def central(self, func, k: int, h: float) -> float:
        plus, minus = self.perturbed(k, h)
        return (func(plus) - func(minus)) / (2.0 * h)


def _powers(p: PolynomialPotential, ks) -> tuple:
    return tuple(sorted(ks)) if ks is not None else p.powers


def _probe(p, n, probe):
    return probe if probe is not None else SpectrumProbe(p, n)


def legendre_pair(p: PolynomialPotential, n: int = 0, probe: SpectrumProbe | None = None) -> LegendrePair:
    probe = _probe(p, n, probe)
    s = probe.state(p)
    return LegendrePair(s.alpha, p.to_dict(), moments_for(s, p), fisher_direct(s))


def alpha_gradient_fd(p: PolynomialPotential, n: int = 0, cfg: FDConfig | None = None,
                      ks=None, probe: SpectrumProbe | None = None) -> dict[int, float]:
    """d alpha / d lambda_k by central differences for each requested power.

    ``ks`` defaults to the powers present in ``p``; absent powers may be
    listed explicitly and are perturbed both ways around zero.
    """
    cfg = cfg or FDConfig()
    probe = _probe(p, n, probe)
    return {k: probe.central(probe.alpha, k, cfg.step(p[k])) for k in _powers(p, ks)}


def reciprocity_residuals(p: PolynomialPotential, n: int = 0, cfg: FDConfig | None = None,
                          ks=None, probe: SpectrumProbe | None = None) -> dict[int, float]:
    """|d alpha/d lambda_k + <x^k>| per power."""
    probe = _probe(p, n, probe)
    grad = alpha_gradient_fd(p, n, cfg, ks, probe)
    return {k: abs(g + probe.moment(p, k)) for k, g in grad.items()}


def euler_residual(p: PolynomialPotential, n: int = 0, cfg: FDConfig | None = None, i: int = 2,
                   probe: SpectrumProbe | None = None) -> float:
    """|dI/d lambda_i - sum_k lambda_k d<x^k>/d lambda_i| with I from the derivative route."""
    cfg = cfg or FDConfig()
    probe = _probe(p, n, probe)
    h = cfg.step(p[i])
    dI = probe.central(probe.fisher, i, h)
    rhs = sum(lam * probe.central(lambda q, k=k: probe.moment(q, k), i, h)
              for k, lam in p.lambdas.items())
    return abs(dI - rhs)


def pde_residual(p: PolynomialPotential, n: int = 0, cfg: FDConfig | None = None,
                 probe: SpectrumProbe | None = None) -> float:
    """Relative residual of alpha = sum_k (1 + k/2) lambda_k d alpha/d lambda_k."""
    probe = _probe(p, n, probe)
    alpha = probe.alpha(p)
    grad = alpha_gradient_fd(p, n, cfg, None, probe)
    rhs = sum((1.0 + k / 2.0) * p[k] * g for k, g in grad.items())
    return abs(alpha - rhs) / max(abs(alpha), 1.0)


def alpha_hessian_fd(p: PolynomialPotential, n: int = 0, cfg: FDConfig | None = None,
                     ks=None, probe: SpectrumProbe | None = None) -> LambdaMatrix:
    """Symmetrized second central differences of alpha."""
    cfg = cfg or FDConfig()
    probe = _probe(p, n, probe)
    powers = _powers(p, ks)
    steps = {k: cfg.step(p[k], hessian=True) for k in powers}
    for k in powers:
        probe.perturbed(k, steps[k])  # confinement guard
    a0 = probe.alpha(p)

    def at(shifts):
        q = dict(p.lambdas)
        for k, s in shifts.items():
            q[k] = q.get(k, 0.0) + s
        q = PolynomialPotential(q)
        if not is_confining(q):
            raise PerturbationBreaksConfinement(next(iter(shifts)), max(map(abs, shifts.values())))
        return probe.alpha(q)

    m = len(powers)
    H = np.empty((m, m))
    for a, k in enumerate(powers):
        hk = steps[k]
        H[a, a] = (at({k: hk}) - 2.0 * a0 + at({k: -hk})) / hk**2
        for b in range(a + 1, m):
            l = powers[b]
            hl = steps[l]
            H[a, b] = (at({k: hk, l: hl}) - at({k: hk, l: -hl})
                       - at({k: -hk, l: hl}) + at({k: -hk, l: -hl})) / (4.0 * hk * hl)
            H[b, a] = H[a, b]
    return LambdaMatrix(powers, 0.5 * (H + H.T))


def moment_jacobian_fd(p: PolynomialPotential, n: int = 0, cfg: FDConfig | None = None,
                       ks=None, probe: SpectrumProbe | None = None) -> LambdaMatrix:
    """J[i, j] = d<x^{k_i}> / d lambda_{k_j}."""
    cfg = cfg or FDConfig()
    probe = _probe(p, n, probe)
    powers = _powers(p, ks)
    J = np.empty((len(powers), len(powers)))
    for j, kj in enumerate(powers):
        plus, minus = probe.perturbed(kj, cfg.step(p[kj]))
        h = cfg.step(p[kj])
        for i, ki in enumerate(powers):
            J[i, j] = (probe.moment(plus, ki) - probe.moment(minus, ki)) / (2.0 * h)
    return LambdaMatrix(powers, J)


@dataclass
class RR2Result:
    powers: tuple
    product: np.ndarray
    fisher_hessian: np.ndarray
    alpha_hessian: np.ndarray
    jacobian: np.ndarray
    notes: list = field(default_factory=list)

    @property
    def deviation(self) -> float:
        """Max-norm distance of the product from minus the identity."""
        return float(np.max(np.abs(self.product + np.eye(len(self.powers)))))

    @property
    def max_off_diagonal(self) -> float:
        off = self.product - np.diag(np.diag(self.product))
        return float(np.max(np.abs(off))) if off.size else 0.0

    def to_dict(self) -> dict:
        return {"powers": list(self.powers), "product": self.product.tolist(),
                "fisher_hessian": self.fisher_hessian.tolist(),
                "alpha_hessian": self.alpha_hessian.tolist(),
                "deviation": self.deviation, "notes": list(self.notes)}


def rr2_product_check(p: PolynomialPotential, n: int = 0, cfg: FDConfig | None = None,
                      ks=None, probe: SpectrumProbe | None = None,
                      max_condition: float = 1e12) -> RR2Result:
    """Product of d^2 I/d<x^i>d<x^k> and d^2 alpha/d lambda_k d lambda_j; should be -identity.

    Moments cannot be dialed independently, so the I-Hessian is obtained
    as d lambda / d<x>, the inverse of the finite-difference moment
    Jacobian (dI/d<x^k> = lambda_k licenses the chain rule).
    """
    cfg = cfg or FDConfig()
    probe = _probe(p, n, probe)
    J = moment_jacobian_fd(p, n, cfg, ks, probe)
    cond = np.linalg.cond(J.values)
    if not np.isfinite(cond) or cond > max_condition:
        raise SingularJacobian(f"moment Jacobian condition number {cond:.3g} exceeds {max_condition:g}")
    # entry (k, i) of inv(J) is d lambda_k / d<x^i>, so the I-Hessian is its transpose
    fisher_hessian = np.linalg.inv(J.values).T
    A = alpha_hessian_fd(p, n, cfg, ks, probe)
    product = fisher_hessian @ A.values
    return RR2Result(J.powers, product, fisher_hessian, A.values, J.values,
                     ["I-Hessian from inverse of finite-difference moment Jacobian"])
