"""Run configuration: a flat ``key = value`` text format plus CLI overrides.

Example::

    # quartic oscillator, two states
    lambda 4 = -8
    states = 2
    tol = 1e-8
    checks = fisher,virial,pde

Multipliers use repeatable ``lambda k = value`` lines; every other line
is ``key = value`` with the keys in :data:`KEYS`.  ``#`` starts a comment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

from .core import GridSpec, PolynomialPotential, validate_potential
from .eigensolver import SolveOptions
from .errors import ConfigError
from .legendre import FDConfig
from .verify import parse_checks

FORMATS = ("json", "csv")


def _float(text: str, key: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: value must be finite, got {text!r}")
    return value


def _int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def _bool(text: str, key: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {text!r}")


def parse_floats(text: str, key: str) -> tuple[float, ...]:
    return tuple(_float(v, key) for v in text.split(",") if v.strip())


def parse_ints(text: str, key: str) -> tuple[int, ...]:
    return tuple(_int(v, key) for v in text.split(",") if v.strip())


def parse_lambda(text: str) -> tuple[int, float]:
    """``"k=value"`` (spaces allowed) -> (k, value)."""
    k, sep, v = text.partition("=")
    if not sep:
        raise ConfigError(f"lambda entry must look like k=value, got {text!r}")
    k = _int(k.strip(), "lambda")
    if k < 1:
        raise ConfigError(f"lambda power must be >= 1, got {k}")
    return k, _float(v.strip(), f"lambda {k}")


def parse_grid(text: str) -> tuple[float, float, int]:
    parts = [t.strip() for t in text.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"grid must be min,max,n, got {text!r}")
    grid = (_float(parts[0], "grid"), _float(parts[1], "grid"), _int(parts[2], "grid"))
    try:
        GridSpec(*grid)
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from None
    return grid


@dataclass(frozen=True)
class RunConfig:
    lambdas: dict = field(default_factory=dict)
    states: int = 1
    grid: tuple | None = None
    # None: automatic domain unless a grid is given
    auto_domain: bool | None = None
    tol: float = 1e-8
    max_refinements: int = 8
    fd_step: float = 1e-4
    hessian_step: float = 1e-3
    checks: tuple | None = None
    jobs: int = 1
    scan_k: int | None = None
    scan_values: tuple | None = None
    scan_states: tuple = (0,)
    out: str | None = None
    format: str = "json"
    csv: str | None = None
    timing: bool = False

    def __post_init__(self):
        if self.states < 1:
            raise ConfigError(f"states must be >= 1, got {self.states}")
        if not self.tol > 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.max_refinements < 0:
            raise ConfigError("max_refinements must be >= 0")
        if not (self.fd_step > 0 and self.hessian_step > 0):
            raise ConfigError("finite-difference steps must be positive")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if any(n < 0 for n in self.scan_states) or not self.scan_states:
            raise ConfigError("scan_states must be a nonempty list of indices >= 0")
        if self.checks is not None:
            try:
                parse_checks(",".join(self.checks))
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.auto_domain is False and self.grid is None:
            raise ConfigError("auto_domain = false needs a grid")

    # -- conversions -------------------------------------------------------

    def potential(self) -> PolynomialPotential:
        if not self.lambdas:
            raise ConfigError("no multipliers given; use --lambda k=value")
        try:
            return validate_potential(PolynomialPotential(self.lambdas))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def solve_options(self, n_states: int | None = None) -> SolveOptions:
        auto = self.grid is None if self.auto_domain is None else self.auto_domain
        return SolveOptions(n_states=n_states or self.states, target_tolerance=self.tol,
                            max_refinements=self.max_refinements, auto_domain=auto,
                            grid=GridSpec(*self.grid) if self.grid else None)

    def fd_config(self) -> FDConfig:
        return FDConfig(relative_step=self.fd_step, hessian_step=self.hessian_step)

    # -- text form ---------------------------------------------------------

    def to_lines(self) -> list[str]:
        """Canonical text; ``parse_config(to_text())`` reproduces this object."""
        lines = [f"lambda {k} = {v!r}" for k, v in sorted(self.lambdas.items())]
        default = RunConfig()
        for f in fields(self):
            if f.name == "lambdas":
                continue
            value = getattr(self, f.name)
            if value == getattr(default, f.name):
                continue
            lines.append(f"{f.name} = {_render(value)}")
        return lines

    def to_text(self) -> str:
        return "\n".join(self.to_lines()) + "\n"


def _render(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(_render(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


_PARSERS = {
    "states": _int,
    "grid": lambda t, k: parse_grid(t),
    "auto_domain": _bool,
    "tol": _float,
    "max_refinements": _int,
    "fd_step": _float,
    "hessian_step": _float,
    "checks": lambda t, k: tuple(c.strip() for c in t.split(",") if c.strip()),
    "jobs": _int,
    "scan_k": _int,
    "scan_values": parse_floats,
    "scan_states": parse_ints,
    "out": lambda t, k: t,
    "format": lambda t, k: t.strip().lower(),
    "csv": lambda t, k: t,
    "timing": _bool,
}
KEYS = ("lambda", *_PARSERS)


def parse_config(text: str) -> RunConfig:
    lambdas, values = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("lambda") and not line.startswith("lambdas"):
            k, v = parse_lambda(line[len("lambda"):])
            if k in lambdas:
                raise ConfigError(f"line {lineno}: lambda {k} given twice")
            lambdas[k] = v
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _PARSERS[key](value.strip(), key)
    return RunConfig(lambdas=lambdas, **values)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None


def merge(base: RunConfig, lambdas: dict | None = None, **overrides) -> RunConfig:
    """Apply CLI overrides; ``None`` means "not given".  Multipliers merge per power."""
    merged = dict(base.lambdas)
    merged.update(lambdas or {})
    given = {k: v for k, v in overrides.items() if v is not None}
    return replace(base, lambdas=merged, **given)
