"""Melnikov functions of polynomial foliation deformations.

Exact algebra for pencil and logarithmic foliations, numerically traced
vanishing cycles, Abelian integrals with error bounds, first and higher
Melnikov functions, relative-exactness and tangent-cone decisions,
center obstruction polynomials, and an independent holonomy oracle.
"""

from .algebra import (
    BivarPoly,
    GaussianRational,
    OneForm,
    ParseError,
    TwoForm,
    exterior_d,
    format_poly,
    parse_poly,
    wedge,
)
from .config import RunConfig, max_symbolic_degree
from .foliation import FoliationForm, LogarithmicSpec, PencilSpec, singular_points
from .fibration import Cycle, critical_data, trace_family, trace_to_level
from .abelian import RationalForm, FiberChain, integrate, integrate_many, periods
from .relexact import (
    DecompositionBounds,
    DecompositionInfeasible,
    decompose,
    default_bounds,
    is_relatively_exact,
    tangent_form,
    tangent_membership,
)
from .melnikov import (
    DeformationSpec,
    MelnikovResult,
    count_zeros,
    first_melnikov,
    higher_melnikov,
)
from .oracle import HolonomySample, holonomy, melnikov_fd, melnikov_fd_scan
from .center import normalize_linear_part, obstructions

__all__ = [
    "BivarPoly",
    "GaussianRational",
    "OneForm",
    "TwoForm",
    "exterior_d",
    "wedge",
    "parse_poly",
    "format_poly",
    "ParseError",
    "RunConfig",
    "max_symbolic_degree",
    "PencilSpec",
    "LogarithmicSpec",
    "FoliationForm",
    "singular_points",
    "Cycle",
    "critical_data",
    "trace_family",
    "trace_to_level",
    "RationalForm",
    "FiberChain",
    "integrate",
    "integrate_many",
    "periods",
    "DecompositionBounds",
    "DecompositionInfeasible",
    "decompose",
    "default_bounds",
    "is_relatively_exact",
    "tangent_form",
    "tangent_membership",
    "DeformationSpec",
    "MelnikovResult",
    "first_melnikov",
    "higher_melnikov",
    "count_zeros",
    "HolonomySample",
    "holonomy",
    "melnikov_fd",
    "melnikov_fd_scan",
    "normalize_linear_part",
    "obstructions",
]

__version__ = "0.1.0"
