import functools

import pytest

from fisherlab import PolynomialPotential, SolveOptions, solve

HO = {2: -4.0}
QUARTIC = {4: -8.0}
SHIFTED_HO = {1: 8.0, 2: -4.0}
DOUBLE_WELL = {2: 4.0, 4: -8.0}
TWO_TERM = {2: -4.0, 4: -8.0}

# the four potentials used throughout the acceptance criteria
TEST_POTENTIALS = {"ho": HO, "quartic": QUARTIC, "shifted_ho": SHIFTED_HO, "double_well": DOUBLE_WELL}


@functools.lru_cache(maxsize=None)
def _solve_cached(items: tuple, n_states: int, tol: float, max_refinements: int):
    opts = SolveOptions(n_states=n_states, target_tolerance=tol, max_refinements=max_refinements)
    return tuple(solve(PolynomialPotential(dict(items)), opts))


def solved(lambdas: dict, n_states: int = 1, tol: float = 1e-8, max_refinements: int = 8):
    """Converged states, shared across the test session."""
    return list(_solve_cached(tuple(sorted(lambdas.items())), n_states, tol, max_refinements))


@pytest.fixture
def pot():
    return PolynomialPotential


# -- acceptance summary -------------------------------------------------------

ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Record one PASS/FAIL line for an acceptance criterion and print it."""
    def _record(criterion: str, passed: bool, detail: str) -> bool:
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
