"""The verification suite run by ``fisherlab verify``.

Each check adds one or more :class:`CheckEntry` rows named
``<check>.<quantity>[.k<power>].n<state>``.  Tolerances:

=============  ==========================================  =========
check          quantity                                    tolerance
=============  ==========================================  =========
fisher         relative spread of the three routes         1e-4 (ground), 1e-3 (excited)
virial         relative virial residual                    1e-5 (ground), 1e-4 (excited)
cramer_rao     I sigma^2 (lower bound)                     >= 1 - 1e-9
               |I sigma^2 - 1| for quadratic potentials    1e-6
reciprocity    |d alpha/d lambda_k + <x^k>| per power      1e-4
euler          dI/d lambda_i against moment derivatives    1e-3
pde            relative eigenvalue-PDE residual            1e-3
rr2            max |product + identity|                    5e-3
concavity      largest alpha-Hessian eigenvalue            1e-6
scaling        relative covariance residual, s = 2, 4      1e-5
translate      shifted identity / shifted virial           1e-5
               Fisher invariance, moment consistency       1e-8
               |lambda*_1| / max(|U''(xi)|, 1)             1e-8
               re-centred spectrum                         1e-6
=============  ==========================================  =========

Cramer-Rao entries are computed from a separate solve at eigenvalue
tolerance 1e-10; at 1e-8 the discretisation deficit of I sigma^2 is of
the same order as the 1e-9 allowance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .characteristics import scaled_potential
from .core import (Eigenstate, FisherTriple, PolynomialPotential, VerificationReport,
                   eval_potential_derivative)
from .eigensolver import SolveOptions, solve, solve_with_history
from .errors import SingularJacobian
from .legendre import (FDConfig, SpectrumProbe, alpha_hessian_fd, euler_residual, pde_residual,
                       reciprocity_residuals, rr2_product_check)
from .observables import cramer_rao_product, fisher_all, moments, moments_for, virial_check
from .translate import (ShiftData, direct_shifted_moment, recentered_spectrum_check,
                        shifted_identity_check, shifted_moments, shifted_multipliers,
                        shifted_virial_check)

CHECKS = ("fisher", "virial", "cramer_rao", "reciprocity", "euler", "pde", "rr2",
          "concavity", "scaling", "translate")

TOLERANCES = {
    "fisher": (1e-4, 1e-3),
    "virial": (1e-5, 1e-4),
    "cramer_rao": 1e-9,
    "cramer_rao_equality": 1e-6,
    "reciprocity": 1e-4,
    "euler": 1e-3,
    "pde": 1e-3,
    "rr2": 5e-3,
    "concavity": 1e-6,
    "scaling": 1e-5,
    "translate": 1e-5,
    "translate_exact": 1e-8,
    "recentered": 1e-6,
}
SCALE_FACTORS = (2.0, 4.0)
CRAMER_RAO_SOLVE_TOL = 1e-10


def parse_checks(spec: str | None) -> tuple[str, ...]:
    """Comma-separated check names (or ``all``) -> ordered tuple."""
    if spec is None or spec.strip() in ("", "all"):
        return CHECKS
    names = [c.strip() for c in spec.split(",") if c.strip()]
    unknown = [c for c in names if c not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks {unknown}; choose from {', '.join(CHECKS)}")
    return tuple(c for c in CHECKS if c in names)


@dataclass
class SuiteResult:
    report: VerificationReport
    states: list
    fisher: list = field(default_factory=list)
    shift: ShiftData | None = None


def _by_state(n: int, pair):
    return pair[0] if n == 0 else pair[1]


def run_suite(p: PolynomialPotential, opts: SolveOptions | None = None,
              fd: FDConfig | None = None, checks=CHECKS) -> SuiteResult:
    opts = opts or SolveOptions()
    fd = fd or FDConfig()
    base = solve_with_history(p, opts)
    states: list[Eigenstate] = base.states
    report = VerificationReport(metadata={"n_points": base.grid.n_points,
                                          "x_min": base.grid.x_min, "x_max": base.grid.x_max})
    triples = [fisher_all(s, p) for s in states]
    result = SuiteResult(report, states, triples)

    for n, s in enumerate(states):
        if "fisher" in checks:
            report.add(f"fisher.spread.n{n}", triples[n].max_spread, _by_state(n, TOLERANCES["fisher"]))
        if "virial" in checks:
            report.add(f"virial.residual.n{n}", virial_check(s, p).residual,
                       _by_state(n, TOLERANCES["virial"]))

    if "cramer_rao" in checks:
        _cramer_rao(report, p, opts)

    fd_checks = {"reciprocity", "euler", "pde", "rr2", "concavity"} & set(checks)
    for n in range(len(states)) if fd_checks else ():
        _fd_suite(report, p, n, fd, SpectrumProbe(p, n, grid=base.grid), checks)

    if "scaling" in checks:
        for s_factor in SCALE_FACTORS:
            scaled = solve(scaled_potential(p, s_factor), opts)
            for n, (a, b) in enumerate(zip(states, scaled)):
                res = abs(b.alpha - s_factor * a.alpha) / (s_factor * abs(a.alpha) + 1.0)
                report.add(f"scaling.s{s_factor:g}.n{n}", res, TOLERANCES["scaling"])

    if "translate" in checks:
        result.shift = _translate_suite(report, p, states, opts)
    return result


def _cramer_rao(report: VerificationReport, p: PolynomialPotential, opts: SolveOptions) -> None:
    tight = replace(opts, target_tolerance=min(opts.target_tolerance, CRAMER_RAO_SOLVE_TOL),
                    max_refinements=max(opts.max_refinements, 12))
    quadratic = set(p.powers) <= {1, 2}
    for n, s in enumerate(solve(p, tight)):
        value = cramer_rao_product(s)
        report.add(f"cramer_rao.product.n{n}", value, 1.0 - TOLERANCES["cramer_rao"], bound="min")
        if quadratic and n == 0:
            report.add(f"cramer_rao.equality.n{n}", abs(value - 1.0), TOLERANCES["cramer_rao_equality"])


def _fd_suite(report, p, n, fd, probe, checks) -> None:
    if "reciprocity" in checks:
        for k, r in reciprocity_residuals(p, n, fd, probe=probe).items():
            report.add(f"reciprocity.k{k}.n{n}", r, TOLERANCES["reciprocity"])
    if "euler" in checks:
        for i in p.powers:
            report.add(f"euler.k{i}.n{n}", euler_residual(p, n, fd, i, probe), TOLERANCES["euler"])
    if "pde" in checks:
        report.add(f"pde.residual.n{n}", pde_residual(p, n, fd, probe), TOLERANCES["pde"])
    hessian = None
    if "rr2" in checks:
        try:
            rr2 = rr2_product_check(p, n, fd, probe=probe)
            hessian = rr2.alpha_hessian
            report.add(f"rr2.deviation.n{n}", rr2.deviation, TOLERANCES["rr2"])
            report.metadata[f"rr2.n{n}"] = rr2.to_dict()
        except SingularJacobian as exc:
            report.add(f"rr2.deviation.n{n}", math.inf, TOLERANCES["rr2"])
            report.metadata[f"rr2.n{n}"] = {"error": str(exc)}
    if "concavity" in checks:
        if hessian is None:
            hessian = alpha_hessian_fd(p, n, fd, probe=probe).values
        report.add(f"concavity.max_eigenvalue.n{n}", float(np.max(np.linalg.eigvalsh(hessian))),
                   TOLERANCES["concavity"])


def _translate_suite(report, p, states, opts) -> ShiftData:
    shift = shifted_multipliers(p, alpha=states[0].alpha)
    curvature = max(abs(float(eval_potential_derivative(p, shift.xi, 2))), 1.0)
    report.add("translate.lambda1_star", abs(shift.lambdas_star.get(1, 0.0)) / curvature,
               TOLERANCES["translate_exact"])
    k_max = max(p.M, 2)
    for n, s in enumerate(states):
        ident = shifted_identity_check(s, p, shift)
        report.add(f"translate.identity.n{n}", ident.residual, TOLERANCES["translate"])
        report.add(f"translate.invariance.n{n}", ident.invariance_residual, TOLERANCES["translate_exact"])
        report.add(f"translate.virial.n{n}", shifted_virial_check(s, p, shift).residual,
                   TOLERANCES["translate"])
        mu = shifted_moments(moments(s, k_max), shift.xi, k_max)
        worst = max(abs(mu[k] - direct_shifted_moment(s, shift.xi, k)) / max(abs(mu[k]), 1.0)
                    for k in range(1, k_max + 1))
        report.add(f"translate.moments.n{n}", worst, TOLERANCES["translate_exact"])
    spectrum = recentered_spectrum_check(p, len(states), opts, shift)
    report.add("translate.recentered_spectrum", spectrum.residual, TOLERANCES["recentered"])
    report.metadata["degenerate_minimum"] = shift.degenerate
    return shift


def state_summary(states, p: PolynomialPotential, triples: list[FisherTriple] | None = None) -> list[dict]:
    """Per-state alpha, Fisher routes and moments for reports."""
    out = []
    for n, s in enumerate(states):
        m = moments_for(s, p)
        t = triples[n] if triples else fisher_all(s, p, m)
        out.append({"n": n, "alpha": s.alpha, "energy": s.energy, "fisher": t.to_dict(),
                    "moments": {str(k): v for k, v in m.to_dict().items()}})
    return out
