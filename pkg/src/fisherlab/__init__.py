"""Finite-difference eigenstates of polynomial potentials and the Fisher-information
identities they satisfy."""

__version__ = "0.1.0"

from .core import (CheckEntry, Eigenstate, FisherTriple, GridSpec, MomentSet, PolynomialPotential,
                   VerificationReport, eval_potential, eval_potential_derivative, validate_potential)
from .eigensolver import SolveOptions, solve, solve_on_grid, solve_with_history
from .observables import (cramer_rao_product, fisher_all, fisher_direct, fisher_identity,
                          fisher_virial, moment, moments, virial_check)
from .legendre import (FDConfig, SpectrumProbe, alpha_gradient_fd, euler_residual, pde_residual,
                       reciprocity_residuals, rr2_product_check)
from .ansatz import (ansatz_alpha, constants_consistency, fisher_powerlaw_check,
                     fit_scaling_exponent, nondimensionalize, scan_single_term)
from .characteristics import (characteristic_invariants, flow, scaling_covariance_check,
                              solution_surface_check)
from .translate import find_minimum, shifted_moments, shifted_multipliers
from .verify import run_suite

__all__ = [
    "CheckEntry", "Eigenstate", "FisherTriple", "GridSpec", "MomentSet", "PolynomialPotential",
    "VerificationReport", "eval_potential", "eval_potential_derivative", "validate_potential",
    "SolveOptions", "solve", "solve_on_grid", "solve_with_history",
    "cramer_rao_product", "fisher_all", "fisher_direct", "fisher_identity", "fisher_virial",
    "moment", "moments", "virial_check",
    "FDConfig", "SpectrumProbe", "alpha_gradient_fd", "euler_residual", "pde_residual",
    "reciprocity_residuals", "rr2_product_check",
    "ansatz_alpha", "constants_consistency", "fisher_powerlaw_check", "fit_scaling_exponent",
    "nondimensionalize", "scan_single_term",
    "characteristic_invariants", "flow", "scaling_covariance_check", "solution_surface_check",
    "find_minimum", "shifted_moments", "shifted_multipliers",
    "run_suite",
]
