"""Verified solver suite for quasilinear competition-diffusion systems.

The package splits into sampled hypothesis checking (``checker``), two
independent solution routes (``fdm`` on the grid, ``duhamel`` through the
heat kernel), trajectory analysis (``analysis``), and declarative scenario
execution (``config``, ``scenarios``, ``runner``, ``cli``).
"""

__version__ = "0.1.0"

from .errors import (ConfigError, DegenerateRefinement, DivisionDomainError,
                     DomainError, IntegrabilityError, NonContraction,
                     NonConvergence, ParaposError, SolverError, SpecError)
from .model import (CoefficientSet, CutoffFunction, Field, Grid,
                    LVCoefficients, Majorants, ProblemSpec, SpatialDomain,
                    build_cutoff, build_lv_problem)

__all__ = [
    "__version__",
    "ConfigError", "DegenerateRefinement", "DivisionDomainError",
    "DomainError", "IntegrabilityError", "NonContraction", "NonConvergence",
    "ParaposError", "SolverError", "SpecError",
    "CoefficientSet", "CutoffFunction", "Field", "Grid", "LVCoefficients",
    "Majorants", "ProblemSpec", "SpatialDomain", "build_cutoff",
    "build_lv_problem",
]
