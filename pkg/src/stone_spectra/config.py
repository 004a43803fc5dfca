"""Numerical controls shared by every module."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace

from .errors import DomainError


@dataclass(frozen=True)
class SeriesControl:
    """Truncation rule for the infinite series.

    Summation stops once ``|term| < rel_tol*|partial sum| + abs_tol`` holds
    for three consecutive terms, or raises after ``max_terms``.
    """

    rel_tol: float = 1e-14
    abs_tol: float = 1e-300
    max_terms: int = 500

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be positive")
        if self.abs_tol < 0:
            raise DomainError("abs_tol must be nonnegative")
        if int(self.max_terms) < 1:
            raise DomainError("max_terms must be >= 1")


DEFAULT_EPS_SCHEDULE = (1e-1, 5e-2, 2.5e-2, 1.25e-2, 6.25e-3)


@dataclass(frozen=True)
class NumericsConfig:
    """Quadrature, extrapolation and detection settings.

    ``eps_schedule`` discretises the limit eps -> 0+ in Stone's formula and
    ``t_cutoff`` replaces the lower endpoint -inf of its t-integral.
    """

    quad_tol: float = 1e-10
    cross_check_tol: float = 1e-6
    eps_schedule: tuple = DEFAULT_EPS_SCHEDULE
    t_cutoff: float = 40.0
    atom_jump_tol: float = 1e-3
    sing_tol: float = 1e-10
    decay_radius: float = 8.0
    refine_grid: bool = True
    threads: int | None = None
    series: SeriesControl = field(default_factory=SeriesControl)

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_schedule)
        object.__setattr__(self, "eps_schedule", eps)
        if len(eps) < 2:
            raise DomainError("eps_schedule needs at least two values")
        if any(e <= 0 for e in eps):
            raise DomainError("eps_schedule values must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise DomainError("eps_schedule must be strictly decreasing")
        if not self.t_cutoff > 0:
            raise DomainError("t_cutoff must be positive")
        for name in ("quad_tol", "cross_check_tol", "atom_jump_tol", "sing_tol", "decay_radius"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.threads is not None and int(self.threads) < 1:
            raise DomainError("threads must be >= 1")

    def with_overrides(self, **overrides) -> NumericsConfig:
        """Return a copy with some fields replaced (unknown names raise)."""
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise DomainError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        return replace(self, **overrides)

    def worker_count(self) -> int:
        if self.threads is not None:
            return int(self.threads)
        env = os.environ.get("STONE_SPECTRA_THREADS")
        if env:
            try:
                n = int(env)
            except ValueError:
                raise DomainError("STONE_SPECTRA_THREADS must be an integer >= 1") from None
            if n < 1:
                raise DomainError("STONE_SPECTRA_THREADS must be an integer >= 1")
            return n
        return 1

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, SeriesControl):
                value = {g.name: getattr(value, g.name) for g in fields(value)}
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out


DEFAULT_SERIES = SeriesControl()
DEFAULT_CONFIG = NumericsConfig()
