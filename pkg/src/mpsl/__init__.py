"""Multi-point Sturm-Liouville spectra, nodal classification and nonlinear solvers."""

from .errors import (
    ContinuationBreakdown,
    DivergenceError,
    HypothesisError,
    HypothesisReport,
    MpslError,
    NoConvergence,
    NoCrossing,
    NumericError,
    ParseError,
    ProblemDataError,
    SeedFailure,
    SingularSystem,
    UnresolvableZeros,
)
from .problem import (
    BoundarySide,
    ProblemSpec,
    ValidationReport,
    load_problem,
    problem_from_dict,
    scale_coefficients,
    validate_problem,
)
from .trig import TrigSolution, bc_functional, eval_solution, sup_norms

__version__ = "0.1.0"
__all__ = [
    "BoundarySide",
    "ProblemSpec",
    "TrigSolution",
    "ValidationReport",
    "bc_functional",
    "eval_solution",
    "load_problem",
    "problem_from_dict",
    "scale_coefficients",
    "sup_norms",
    "validate_problem",
    "MpslError",
    "ProblemDataError",
    "HypothesisError",
    "HypothesisReport",
    "NumericError",
    "ContinuationBreakdown",
    "NoConvergence",
    "NoCrossing",
    "SingularSystem",
    "SeedFailure",
    "DivergenceError",
    "UnresolvableZeros",
    "ParseError",
]
