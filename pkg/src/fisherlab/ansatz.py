"""Separable power-law forms of alpha and I, fitted from eigensolver scans.

    alpha = sum_k D_k |lambda_k|^(2/(2+k))
    I     = sum_k C_k |<x^k>|^(-2/k)

with C_k = (k/2) Cbar_k, D_k = ((k+2)/2) Dbar_k and Dbar_k^(2+k) = Cbar_k^k = F_k^2.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .core import PolynomialPotential
from .eigensolver import SolveOptions, solve
from .errors import MissingConstant, NonpositiveConstant, NonpositiveD, NonpositiveScale
from .observables import fisher_direct, moment
from .translate import shifted_multipliers


@dataclass(frozen=True)
class Dimensionless:
    """Multipliers Lambda_k = lambda_k * x_scale**(2+k); alpha maps to alpha * x_scale**2."""

    multipliers: dict
    x_scale: float

    @property
    def alpha_factor(self) -> float:
        return self.x_scale**2

    def A(self, alpha: float) -> float:
        return alpha * self.alpha_factor


def nondimensionalize(p: PolynomialPotential | dict, x_scale: float) -> Dimensionless:
    if not x_scale > 0:
        raise NonpositiveScale(f"x_scale must be positive, got {x_scale!r}")
    lambdas = p.lambdas if isinstance(p, PolynomialPotential) else p
    return Dimensionless({k: lam * x_scale ** (2 + k) for k, lam in lambdas.items()}, float(x_scale))


def ansatz_alpha(D: dict, lambdas) -> float:
    """sum_k D_k |lambda_k|^(2/(2+k)); zero multipliers contribute nothing."""
    for k, d in D.items():
        if not d > 0:
            raise NonpositiveD(k, d)
    lambdas = lambdas.lambdas if isinstance(lambdas, PolynomialPotential) else lambdas
    total = 0.0
    for k, lam in lambdas.items():
        if lam == 0:
            continue
        if k not in D:
            raise MissingConstant(k)
        total += D[k] * abs(lam) ** (2.0 / (2 + k))
    return total


@dataclass(frozen=True)
class ScanPoint:
    lambda_k: float
    alpha: float
    fisher: float
    moment_k: float


@dataclass
class Scan:
    k: int
    n: int
    points: list

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([pt.lambda_k for pt in self.points])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(pt, name) for pt in self.points])


def _scan_point(args) -> ScanPoint:
    k, lam, n, opts = args
    s = solve(PolynomialPotential({k: lam}), replace(opts, n_states=n + 1))[n]
    return ScanPoint(lam, s.alpha, fisher_direct(s), moment(s, k))


def check_scan_request(k: int, lambda_values) -> None:
    values = np.asarray(lambda_values, dtype=float)
    if k % 2 or k < 2:
        raise ValueError(f"single-term scans need an even power k >= 2, got {k}")
    if values.size < 5:
        raise ValueError(f"need at least 5 scan values, got {values.size}")
    if np.any(values >= 0):
        raise ValueError("scan values must be negative (confining)")
    if np.max(np.abs(values)) / np.min(np.abs(values)) < 10.0 * (1 - 1e-12):
        raise ValueError("scan values must span at least one decade")


def iter_scan(k: int, lambda_values, n: int = 0, opts: SolveOptions | None = None,
              jobs: int = 1):
    """Yield one :class:`ScanPoint` per value, in input order.

    Call :func:`check_scan_request` first to validate eagerly; here the
    check only runs once iteration starts.
    """
    check_scan_request(k, lambda_values)
    opts = opts or SolveOptions()
    tasks = [(k, float(lam), n, opts) for lam in lambda_values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            yield from pool.map(_scan_point, tasks)
    else:
        for t in tasks:
            yield _scan_point(t)


def scan_single_term(k: int, lambda_values, n: int = 0, opts: SolveOptions | None = None,
                     jobs: int = 1) -> Scan:
    """Solve {k: lambda} for each value and record alpha, I and <x^k> of state n."""
    return Scan(k, n, list(iter_scan(k, lambda_values, n, opts, jobs)))


@dataclass(frozen=True)
class PowerLawFit:
    k: int
    n: int
    kind: str
    exponent_fit: float
    exponent_theory: float
    coefficient: float
    r_squared: float
    n_points: int

    @property
    def exponent_error(self) -> float:
        return abs(self.exponent_fit - self.exponent_theory)

    def to_dict(self) -> dict:
        return {"k": self.k, "n": self.n, "kind": self.kind, "exponent_fit": self.exponent_fit,
                "exponent_theory": self.exponent_theory, "exponent_error": self.exponent_error,
                "coefficient": self.coefficient, "r_squared": self.r_squared,
                "n_points": self.n_points}


def loglog_fit(x, y):
    """Unweighted least-squares line through (log|x|, log|y|): slope, exp(intercept), r^2."""
    lx, ly = np.log(np.abs(x)), np.log(np.abs(y))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(np.exp(intercept)), r2


def fit_scaling_exponent(k: int, lambda_values=None, n: int = 0, opts: SolveOptions | None = None,
                         scan: Scan | None = None, jobs: int = 1) -> PowerLawFit:
    """Fit log alpha against log|lambda_k|; the coefficient is D_k."""
    scan = scan or scan_single_term(k, lambda_values, n, opts, jobs)
    slope, coef, r2 = loglog_fit(scan.lambdas, scan.column("alpha"))
    return PowerLawFit(scan.k, scan.n, "alpha", slope, 2.0 / (2 + scan.k), coef, r2, len(scan.points))


def fisher_powerlaw_check(k: int, lambda_values=None, n: int = 0, opts: SolveOptions | None = None,
                          scan: Scan | None = None, jobs: int = 1) -> PowerLawFit:
    """Fit log I against log <x^k>; the coefficient is C_k."""
    scan = scan or scan_single_term(k, lambda_values, n, opts, jobs)
    slope, coef, r2 = loglog_fit(scan.column("moment_k"), scan.column("fisher"))
    return PowerLawFit(scan.k, scan.n, "fisher", slope, -2.0 / scan.k, coef, r2, len(scan.points))


@dataclass(frozen=True)
class ConstantsTriple:
    k: int
    C: float
    D: float
    C_bar: float
    D_bar: float
    F: float
    residuals: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"k": self.k, "C": self.C, "D": self.D, "C_bar": self.C_bar, "D_bar": self.D_bar,
                "F": self.F, "residuals": dict(self.residuals)}


def constants_consistency(C_k: float, D_k: float, k: int, lambda_k: float | None = None,
                          moment_k: float | None = None) -> ConstantsTriple:
    """Reduced constants and the relative residuals of the C-D relations.

    ``amplitude_relation``: D C^(-k/(2+k)) against ((2+k)/2)(k/2)^(-k/(2+k));
    ``inverse_relation``: C D^(-(k+2)/k) against (k/2)((2+k)/2)^(-(k+2)/k);
    ``power_relation``: Dbar^(2+k) against Cbar^k.
    With ``lambda_k`` and ``moment_k`` given, ``f_squared`` compares
    |lambda_k|^k <x^k>^(2+k) with F_k^2.
    """
    if not (C_k > 0 and D_k > 0):
        raise NonpositiveConstant(f"C_{k} = {C_k!r}, D_{k} = {D_k!r} must both be positive")
    c_bar = 2.0 * C_k / k
    d_bar = 2.0 * D_k / (k + 2)
    F = d_bar ** ((2 + k) / 2.0)
    res = {
        "amplitude_relation": abs(D_k * C_k ** (-k / (2 + k)) / ((2 + k) / 2 * (k / 2) ** (-k / (2 + k))) - 1.0),
        "inverse_relation": abs(C_k * D_k ** (-(k + 2) / k) / (k / 2 * ((2 + k) / 2) ** (-(k + 2) / k)) - 1.0),
        "power_relation": abs(d_bar ** (2 + k) / c_bar**k - 1.0),
    }
    if lambda_k is not None and moment_k is not None:
        res["f_squared"] = abs(f_squared(lambda_k, moment_k, k) / F**2 - 1.0)
    return ConstantsTriple(k, C_k, D_k, c_bar, d_bar, F, res)


def f_squared(lambda_k: float, moment_k: float, k: int) -> float:
    """|lambda_k|^k <x^k>^(2+k)."""
    return abs(lambda_k) ** k * moment_k ** (2 + k)


@dataclass
class OffsetCheck:
    alpha_solver: float
    alpha_formula: float
    xi: float
    U_min: float
    terms: dict

    @property
    def residual(self) -> float:
        return abs(self.alpha_solver - self.alpha_formula) / max(abs(self.alpha_solver), 1.0)

    def to_dict(self) -> dict:
        return {"alpha_solver": self.alpha_solver, "alpha_formula": self.alpha_formula,
                "xi": self.xi, "U_min": self.U_min,
                "terms": {str(k): v for k, v in self.terms.items()}, "residual": self.residual}


def alpha_with_offset_check(p: PolynomialPotential, d_bar: dict | None = None, n: int = 0,
                            alpha: float | None = None, opts: SolveOptions | None = None,
                            zero_tol: float = 1e-9) -> OffsetCheck:
    """Compare the solver's alpha with 8 U(xi) + sum_{k>=2} ((k+2)/2) Dbar_k |lambda*_k|^(2/(k+2)).

    Dbar_2 defaults to 1 only when the potential is quadratic at its
    minimum and no higher shifted multiplier survives.
    """
    shift = shifted_multipliers(p)
    scale = zero_tol * max(1.0, max(abs(v) for v in p.lambdas.values()))
    live = {k: v for k, v in shift.lambdas_star.items() if k >= 2 and abs(v) > scale}
    constants = dict(d_bar or {})
    if 2 not in constants and set(live) == {2}:
        constants[2] = 1.0
    terms = {}
    for k, lam in live.items():
        if k not in constants:
            raise MissingConstant(k)
        if not constants[k] > 0:
            raise NonpositiveConstant(f"Dbar_{k} = {constants[k]!r} must be positive")
        terms[k] = (k + 2) / 2.0 * constants[k] * abs(lam) ** (2.0 / (k + 2))
    if alpha is None:
        alpha = solve(p, replace(opts or SolveOptions(), n_states=n + 1))[n].alpha
    formula = 8.0 * shift.U_min + sum(terms.values())
    return OffsetCheck(alpha, formula, shift.xi, shift.U_min, terms)


@dataclass
class SeparableDiscrepancy:
    """Solver alpha against the additive form built from single-term constants."""

    alpha_solver: float
    alpha_separable: float

    @property
    def relative(self) -> float:
        return abs(self.alpha_separable - self.alpha_solver) / max(abs(self.alpha_solver), 1.0)

    def to_dict(self) -> dict:
        return {"alpha_solver": self.alpha_solver, "alpha_separable": self.alpha_separable,
                "relative_discrepancy": self.relative}


def separable_discrepancy(p: PolynomialPotential, D: dict, n: int = 0,
                          opts: SolveOptions | None = None) -> SeparableDiscrepancy:
    alpha = solve(p, replace(opts or SolveOptions(), n_states=n + 1))[n].alpha
    return SeparableDiscrepancy(alpha, ansatz_alpha(D, p))


def second_divided_differences(x, y) -> np.ndarray:
    """f[x_i, x_{i+1}, x_{i+2}] for points sorted by x; nonnegative for convex data."""
    order = np.argsort(x)
    x, y = np.asarray(x, float)[order], np.asarray(y, float)[order]
    first = np.diff(y) / np.diff(x)
    return np.diff(first) / (x[2:] - x[:-2])


def decade(n_points: int = 6, start: float = -1.0) -> list[float]:
    """``n_points`` log-spaced negative values spanning one decade from ``start``."""
    return [float(v) for v in start * np.logspace(0.0, 1.0, n_points)]
