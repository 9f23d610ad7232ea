"""Domain types shared by every other module.

The information potential is stored through its multipliers,

    U(x) = -(1/8) * sum_k lambda_k x**k,   k >= 1,

in units with hbar = 1 and unit mass.  The normalization multiplier
``alpha`` is eight times the Schroedinger eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import EmptyPotential, MissingMoment, NotConfining


class PolynomialPotential:
    """Immutable set of multipliers ``{k: lambda_k}`` with ``k >= 1``.

    Zero multipliers are dropped at construction, so ``lambdas`` only ever
    lists the powers that are actually present.  No confinement check is
    made here; see :func:`validate_potential`.
    """

    __slots__ = ("_lambdas",)

    def __init__(self, lambdas: Mapping[int, float] | Iterable[tuple[int, float]]):
        items = lambdas.items() if isinstance(lambdas, Mapping) else lambdas
        clean = {}
        for k, value in items:
            if isinstance(k, bool) or int(k) != k:
                raise ValueError(f"power must be an integer, got {k!r}")
            k = int(k)
            if k < 1:
                raise ValueError(f"power must be >= 1 (constant term is carried separately), got {k}")
            value = float(value)
            if not math.isfinite(value):
                raise ValueError(f"lambda_{k} is not finite: {value!r}")
            if value != 0.0:
                clean[k] = clean.get(k, 0.0) + value
        self._lambdas = MappingProxyType(dict(sorted((k, v) for k, v in clean.items() if v != 0.0)))

    @property
    def lambdas(self) -> Mapping[int, float]:
        return self._lambdas

    @property
    def M(self) -> int:
        """Highest power present (0 for an empty potential)."""
        return max(self._lambdas, default=0)

    @property
    def powers(self) -> tuple[int, ...]:
        return tuple(self._lambdas)

    def __getitem__(self, k: int) -> float:
        return self._lambdas.get(k, 0.0)

    def coefficients(self) -> np.ndarray:
        """Ascending coefficients of U itself, index k holds -lambda_k / 8."""
        c = np.zeros(self.M + 1)
        for k, lam in self._lambdas.items():
            c[k] = -lam / 8.0
        return c

    def with_lambda(self, k: int, value: float) -> "PolynomialPotential":
        new = dict(self._lambdas)
        new[k] = value
        return PolynomialPotential(new)

    def scaled(self, factors: Mapping[int, float]) -> "PolynomialPotential":
        return PolynomialPotential({k: lam * factors[k] for k, lam in self._lambdas.items()})

    def to_dict(self) -> dict[int, float]:
        return dict(self._lambdas)

    def __eq__(self, other):
        if not isinstance(other, PolynomialPotential):
            return NotImplemented
        return dict(self._lambdas) == dict(other._lambdas)

    def __hash__(self):
        return hash(tuple(self._lambdas.items()))

    def __repr__(self):
        body = ", ".join(f"{k}: {v!r}" for k, v in self._lambdas.items())
        return f"PolynomialPotential({{{body}}})"


def validate_potential(p: PolynomialPotential) -> PolynomialPotential:
    """Return ``p`` unchanged if it confines, raise otherwise."""
    if not p.lambdas:
        raise EmptyPotential("potential has no nonzero multiplier")
    M = p.M
    lead = p[M]
    if M % 2:
        raise NotConfining(f"leading power {M} is odd; U is unbounded below")
    if lead >= 0:
        raise NotConfining(f"leading multiplier lambda_{M} = {lead!r} must be negative")
    return p


def is_confining(p: PolynomialPotential) -> bool:
    try:
        validate_potential(p)
    except (EmptyPotential, NotConfining):
        return False
    return True


def _horner(coeffs, x):
    result = np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0
    for c in coeffs[::-1]:
        result = result * x + c
    return result


def eval_potential(p: PolynomialPotential, x):
    """U(x) by Horner's scheme; ``x`` may be a scalar or an array."""
    return _horner(p.coefficients(), x)


def derivative_coefficients(p: PolynomialPotential, order: int) -> np.ndarray:
    c = p.coefficients()
    if order >= len(c):
        return np.zeros(1)
    j = np.arange(len(c) - order)
    falling = np.array([math.perm(int(i) + order, order) for i in j], dtype=float)
    return c[order:] * falling


def eval_potential_derivative(p: PolynomialPotential, x, order: int = 1):
    """Exact ``order``-th derivative of U at ``x``."""
    if order < 1:
        raise ValueError("order must be >= 1")
    return _horner(derivative_coefficients(p, order), x)


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of ``n_points`` samples including both endpoints.

    The Dirichlet zeros sit one spacing outside the sampled interval.
    """

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ValueError(f"grid endpoints must be finite, got [{self.x_min}, {self.x_max}]")
        if not self.x_min < self.x_max:
            raise ValueError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if self.n_points < 3:
            raise ValueError(f"need at least 3 points, got {self.n_points}")

    @classmethod
    def symmetric(cls, half_width: float, n_points: int) -> "GridSpec":
        return cls(-float(half_width), float(half_width), int(n_points))

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    def refined(self) -> "GridSpec":
        """Halve the spacing; every old point stays a grid point."""
        return GridSpec(self.x_min, self.x_max, 2 * self.n_points - 1)

    def shifted(self, offset: float) -> "GridSpec":
        return GridSpec(self.x_min + offset, self.x_max + offset, self.n_points)


@dataclass(frozen=True, eq=False)
class Eigenstate:
    index: int
    alpha: float
    psi: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        psi = np.array(self.psi, dtype=float)
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)

    @property
    def energy(self) -> float:
        return self.alpha / 8.0

    @property
    def x(self) -> np.ndarray:
        return self.grid.points()

    @property
    def norm(self) -> float:
        return float(np.sum(self.psi**2) * self.grid.spacing)

    def sign_changes(self, threshold: float = 1e-8) -> int:
        """Nodes counted over samples above ``threshold * max|psi|``."""
        psi = self.psi[np.abs(self.psi) > threshold * np.max(np.abs(self.psi))]
        return int(np.count_nonzero(np.signbit(psi[1:]) != np.signbit(psi[:-1])))


@dataclass(frozen=True)
class MomentSet:
    """Expectation values <x^k>; ``<x^0>`` is always 1."""

    moments: Mapping[int, float]

    def __post_init__(self):
        object.__setattr__(self, "moments", MappingProxyType(dict(sorted(self.moments.items()))))

    def __getitem__(self, k: int) -> float:
        if k == 0:
            return 1.0
        try:
            return self.moments[k]
        except KeyError:
            raise MissingMoment(k) from None

    def __contains__(self, k) -> bool:
        return k == 0 or k in self.moments

    @property
    def k_max(self) -> int:
        return max(self.moments, default=0)

    def to_dict(self) -> dict[int, float]:
        return dict(self.moments)


def relative_difference(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


@dataclass(frozen=True)
class FisherTriple:
    """Fisher information from the derivative, identity and virial routes."""

    direct: float
    identity: float
    virial: float

    @property
    def max_spread(self) -> float:
        vals = (self.direct, self.identity, self.virial)
        return max(relative_difference(a, b) for i, a in enumerate(vals) for b in vals[i + 1:])

    def to_dict(self) -> dict:
        return {"direct": self.direct, "identity": self.identity,
                "virial": self.virial, "max_spread": self.max_spread}


@dataclass(frozen=True)
class CheckEntry:
    name: str
    value: float
    tolerance: float
    # "max": pass when value <= tolerance; "min": pass when value >= tolerance
    bound: str = "max"

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        if self.bound == "min":
            return self.value >= self.tolerance
        return self.value <= self.tolerance

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance,
                "bound": self.bound, "pass": self.passed}


@dataclass
class VerificationReport:
    entries: list[CheckEntry] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, name: str, value: float, tolerance: float, bound: str = "max") -> CheckEntry:
        entry = CheckEntry(name, float(value), float(tolerance), bound)
        self.entries.append(entry)
        return entry

    def extend(self, other: "VerificationReport"):
        self.entries.extend(other.entries)
        self.metadata.update(other.metadata)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list[CheckEntry]:
        return [e for e in self.entries if not e.passed]

    def __getitem__(self, name: str) -> CheckEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"pass": self.passed, "entries": [e.to_dict() for e in self.entries],
                "metadata": self.metadata}
