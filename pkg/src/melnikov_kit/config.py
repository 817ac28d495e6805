"""Run configuration shared by the numeric pipeline and the CLI.

A single dataclass holds every tolerance and knob so reports can embed
the exact configuration that produced them.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, asdict

__all__ = ["RunConfig", "max_symbolic_degree"]

_ENV_MAXDEG = "MELNIKOV_KIT_MAXDEG"


def max_symbolic_degree(default: int = 12) -> int:
    """Degree cap for symbolic work; overridable via MELNIKOV_KIT_MAXDEG."""
    raw = os.environ.get(_ENV_MAXDEG)
    if raw is None:
        return default
    try:
        v = int(raw)
    except ValueError as e:
        raise ValueError(f"{_ENV_MAXDEG} must be an integer, got {raw!r}") from e
    if v < 2:
        raise ValueError(f"{_ENV_MAXDEG} must be at least 2")
    return v


@dataclass
class RunConfig:
    # fiber residency and Newton iteration
    tol_fiber: float = 1e-10
    newton_tol: float = 1e-12
    newton_maxit: int = 40

    # quadrature
    quad_order: int = 12
    quad_tol: float = 1e-10
    quad_max_depth: int = 14

    # cycle refinement
    max_spacing_frac: float = 0.08   # vertex spacing relative to cycle diameter
    max_turn_deg: float = 12.0       # turning angle threshold for insertion
    seed_vertices: int = 64
    max_vertices: int = 6000

    # transport step control
    step_frac: float = 0.05          # |dt| relative to distance to nearest critical value
    max_step_halvings: int = 12
    margin_frac: float = 0.05        # safety margin: fraction of min critical-value gap

    # verdict thresholds
    zero_tol: float = 1e-8
    pole_tol_frac: float = 1e-6      # minimum denominator distance, relative to diameter

    # holonomy oracle
    ode_rtol: float = 1e-11
    ode_atol: float = 1e-13
    tube_frac: float = 0.05
    fd_grid: int = 8
    fd_ratio: float = 0.5

    # misc
    seed: int = 0
    maxdeg: int = field(default_factory=max_symbolic_degree)

    def as_dict(self) -> dict:
        return asdict(self)
