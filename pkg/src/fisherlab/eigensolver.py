"""Finite-difference eigensolver for -(1/2) psi'' + U psi = (alpha/8) psi.

Second-order central stencil on a uniform grid, Dirichlet zeros one
spacing outside the sampled interval.  The lowest eigenpairs come from
Sturm-sequence bisection with inverse iteration (LAPACK ``stebz``/``stein``
through :func:`scipy.linalg.eigh_tridiagonal`); each eigenvalue is then
re-evaluated as a Rayleigh quotient written in difference form, which
avoids the ``eps / dx**2`` absolute error that bisection carries on
fine grids.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .core import Eigenstate, GridSpec, PolynomialPotential, eval_potential, validate_potential
from .errors import ConvergenceFailure, DomainExpansionFailure

log = logging.getLogger(__name__)

DOMAIN_MARGIN = 20.0


@dataclass(frozen=True, eq=False)
class TridiagonalMatrix:
    diagonal: np.ndarray
    off_diagonal: np.ndarray
    spacing: float = 1.0
    # U sampled on the grid; lets eigenvalues be refined without the 1/dx**2 cancellation
    potential: np.ndarray | None = None

    def __post_init__(self):
        if len(self.off_diagonal) != len(self.diagonal) - 1:
            raise ValueError("off_diagonal must have one entry fewer than diagonal")

    @property
    def size(self) -> int:
        return len(self.diagonal)

    def to_dense(self) -> np.ndarray:
        return (np.diag(self.diagonal) + np.diag(self.off_diagonal, 1)
                + np.diag(self.off_diagonal, -1))


@dataclass(frozen=True)
class SolveOptions:
    n_states: int = 1
    target_tolerance: float = 1e-8
    max_refinements: int = 8
    auto_domain: bool = True
    # domain used when auto_domain is off; refinement starts from it
    grid: GridSpec | None = None
    initial_points: int = 1001
    margin: float = DOMAIN_MARGIN

    def __post_init__(self):
        if self.n_states < 1:
            raise ValueError("n_states must be >= 1")
        if not self.target_tolerance > 0:
            raise ValueError("target_tolerance must be positive")
        if self.max_refinements < 0:
            raise ValueError("max_refinements must be >= 0")
        if not self.auto_domain and self.grid is None:
            raise ValueError("auto_domain=False needs an explicit grid")


def build_hamiltonian(p: PolynomialPotential, g: GridSpec) -> TridiagonalMatrix:
    dx = g.spacing
    u = eval_potential(p, g.points())
    diag = 1.0 / dx**2 + u
    off = np.full(g.n_points - 1, -0.5 / dx**2)
    return TridiagonalMatrix(diag, off, dx, u)


def sturm_count(H: TridiagonalMatrix, shift: float) -> int:
    """Number of eigenvalues of ``H`` strictly below ``shift``.

    Plain LDL^T recurrence, kept independent of LAPACK so it can certify
    the indices returned by the bisection driver.
    """
    d = H.diagonal.tolist()
    e2 = (H.off_diagonal**2).tolist()
    shift = float(shift)
    # pivots are kept at least pivmin in size (as in LAPACK's dstebz), so e2/q cannot overflow
    pivmin = np.finfo(float).tiny * max(1.0, max(e2, default=0.0))
    count = 0
    q = d[0] - shift
    for i in range(len(d)):
        if i:
            q = d[i] - shift - e2[i - 1] / q
        if abs(q) <= pivmin:
            q = -pivmin
        if q < 0:
            count += 1
    return count


def rayleigh_quotient(H: TridiagonalMatrix, v: np.ndarray) -> float:
    if H.potential is None:
        Hv = H.diagonal * v
        Hv[:-1] += H.off_diagonal * v[1:]
        Hv[1:] += H.off_diagonal * v[:-1]
        return float(v @ Hv / (v @ v))
    # the stencil's kinetic term is sum of squared jumps, including the two jumps to the Dirichlet zeros
    jumps = np.diff(v, prepend=0.0, append=0.0)
    kinetic = 0.5 * float(jumps @ jumps) / H.spacing**2
    return (kinetic + float(H.potential @ (v * v))) / float(v @ v)


def _fix_sign(v: np.ndarray) -> np.ndarray:
    # "first nonzero" is read above a 1e-3 relative floor; tail samples are at roundoff level
    big = np.flatnonzero(np.abs(v) > 1e-3 * np.max(np.abs(v)))
    return -v if v[big[0]] < 0 else v


def solve_lowest(H: TridiagonalMatrix, n_states: int):
    """Smallest ``n_states`` eigenpairs as ``[(eigenvalue, vector), ...]``.

    Vectors are normalized so that ``sum(v**2) * spacing == 1`` and signed
    so that their first significant component is positive.
    """
    if not 1 <= n_states <= H.size:
        raise ValueError(f"n_states must lie in [1, {H.size}], got {n_states}")
    try:
        w, v = eigh_tridiagonal(H.diagonal, H.off_diagonal, select="i",
                                select_range=(0, n_states - 1), lapack_driver="stebz")
    except (LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"tridiagonal eigensolve failed: {exc}",
                                 {"size": H.size, "n_states": n_states}) from exc
    out = []
    for j in range(n_states):
        vec = v[:, j] / np.sqrt(np.sum(v[:, j] ** 2) * H.spacing)
        vec = _fix_sign(vec)
        out.append((rayleigh_quotient(H, vec), vec))
    values = [val for val, _ in out]
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConvergenceFailure("eigenvalues are not strictly increasing",
                                 {"eigenvalues": values, "bisection": w.tolist()})
    return out


def certify_indices(H: TridiagonalMatrix, eigenvalues) -> None:
    """Check with Sturm counts that ``eigenvalues`` are the lowest ones, none skipped."""
    values = list(eigenvalues)
    n = len(values)
    scale = np.max(np.abs(H.diagonal)) + 2 * np.max(np.abs(H.off_diagonal))
    pad = 64 * np.finfo(float).eps * scale
    below = sturm_count(H, values[0] - pad)
    through = sturm_count(H, values[-1] + pad)
    if below != 0 or through != n:
        raise ConvergenceFailure("Sturm count disagrees with returned spectrum",
                                 {"count_below_lowest": below, "count_through_highest": through,
                                  "n_states": n})


def solve_on_grid(p: PolynomialPotential, grid: GridSpec, n_states: int = 1,
                  certify: bool = False) -> list[Eigenstate]:
    """Eigenstates on a fixed grid, no domain search and no refinement."""
    H = build_hamiltonian(p, grid)
    pairs = solve_lowest(H, n_states)
    if certify:
        certify_indices(H, [val for val, _ in pairs])
    return [Eigenstate(i, 8.0 * val, vec, grid) for i, (val, vec) in enumerate(pairs)]


def potential_minimum_value(p: PolynomialPotential) -> float:
    """Smallest value of U over its real critical points."""
    dcoef = npoly.polyder(p.coefficients())
    roots = npoly.polyroots(dcoef) if len(dcoef) > 1 else np.array([0.0])
    real = roots.real[np.abs(roots.imag) <= 1e-9 * (1 + np.abs(roots))]
    if real.size == 0:
        real = np.array([0.0])
    return float(np.min(eval_potential(p, real)))


def margin_half_width(p: PolynomialPotential, level: float) -> float:
    """Smallest L with U(x) >= level for every |x| >= L."""
    c = p.coefficients().copy()
    c[0] -= level
    roots = npoly.polyroots(c)
    real = roots.real[np.abs(roots.imag) <= 1e-7 * (1 + np.abs(roots))]
    L = float(np.max(np.abs(real))) if real.size else 1.0
    # polyroots is only accurate to a few ulps of the coefficients; nudge outward until it holds
    while min(eval_potential(p, -L), eval_potential(p, L)) < level:
        L *= 1.01
    return L


def choose_domain(p: PolynomialPotential, n_states: int, tolerance: float,
                  margin: float = DOMAIN_MARGIN, probe_points: int = 401,
                  max_expansions: int = 40) -> float:
    """Half-width L of a symmetric domain whose walls sit ``margin`` above the top state."""
    level = potential_minimum_value(p) + margin
    L = margin_half_width(p, level)
    history = []
    for _ in range(max_expansions):
        g = GridSpec.symmetric(L, probe_points)
        alphas = np.array([s.alpha for s in solve_on_grid(p, g, n_states)])
        L_needed = margin_half_width(p, alphas[-1] / 8.0 + margin)
        if L_needed > L * (1 + 1e-12):
            history.append({"L": L, "reason": "margin", "alpha_top": alphas[-1]})
            L = L_needed
            continue
        # walls pushed out at unchanged spacing must not move the spectrum
        wider = GridSpec.symmetric(1.25 * L, int(round(1.25 * (probe_points - 1))) + 1)
        alphas_w = np.array([s.alpha for s in solve_on_grid(p, wider, n_states)])
        shift = float(np.max(np.abs(alphas_w - alphas) / np.maximum(np.abs(alphas_w), 1.0)))
        history.append({"L": L, "reason": "shift", "shift": shift})
        if shift < tolerance:
            return L
        L *= 1.25
    raise DomainExpansionFailure(f"no adequate domain after {max_expansions} expansions",
                                 {"history": history})


@dataclass
class SolveResult:
    """Converged states plus the refinement trail that certified them."""

    states: list[Eigenstate]
    history: list[dict] = field(default_factory=list)

    @property
    def grid(self) -> GridSpec:
        return self.states[0].grid


def solve_with_history(p: PolynomialPotential, opts: SolveOptions | None = None) -> SolveResult:
    opts = opts or SolveOptions()
    validate_potential(p)
    if opts.auto_domain:
        L = choose_domain(p, opts.n_states, opts.target_tolerance, opts.margin)
        grid = GridSpec.symmetric(L, opts.initial_points)
    else:
        grid = opts.grid
    states = solve_on_grid(p, grid, opts.n_states)
    history = [{"n_points": grid.n_points, "alphas": [s.alpha for s in states]}]
    for _ in range(opts.max_refinements):
        grid = grid.refined()
        new = solve_on_grid(p, grid, opts.n_states)
        change = max(abs(a.alpha - b.alpha) / max(abs(a.alpha), 1.0) for a, b in zip(new, states))
        history.append({"n_points": grid.n_points, "alphas": [s.alpha for s in new], "change": change})
        states = new
        if change < opts.target_tolerance:
            break
    else:
        if opts.max_refinements:
            raise ConvergenceFailure(
                f"eigenvalues still moving after {opts.max_refinements} refinements",
                {"history": history, "tolerance": opts.target_tolerance})
    certify_indices(build_hamiltonian(p, grid), [s.energy for s in states])
    log.debug("solved %r on %d points", p, grid.n_points)
    return SolveResult(states, history)


def solve(p: PolynomialPotential, opts: SolveOptions | None = None) -> list[Eigenstate]:
    """Converged lowest eigenstates of ``p`` with ``alpha = 8 * eigenvalue``."""
    return solve_with_history(p, opts).states


def richardson(coarse: float, fine: float, ratio: float = 2.0, order: int = 2) -> float:
    """Extrapolate two values whose error scales as spacing**order."""
    f = ratio**order
    return (f * fine - coarse) / (f - 1.0)
