"""Numerical construction and classification of rotationally symmetric
translating solitons for curvature flows with admissible speed functions."""

from .classifier import Classification, ValidationReport, classify, cross_validate
from .constraint import (ConstraintContext, TailDecay, constraint_context,
                         solve_g, solve_g1, tail_decay_exponent, tail_limit)
from .errors import (BowlforgeError, BracketFailure, DimensionError,
                     DomainError, NonConvergent, NonConvergentLimit,
                     NotApplicable, NotHomogeneous, OutOfDomain, ParseError,
                     StartupFailure)
from .expr import SpeedExpr, measure_homogeneity, parse_speed
from .levelsets import BarrierCurve, asymptotic_exponents, dw_dr, level_value, w_of_r
from .ode import (BlewUpAt, ConvergenceReport, IntegrationConfig, LeftDomain,
                  ProfileSolution, ReachedHorizon, integrate, rhs,
                  slope_at_origin, start_convergence)
from .profiles import (AsymptoticFit, BowlProfile, ConvexityReport,
                       check_convexity, curvatures, fit_asymptotics,
                       recover_u, residual)
from .speeds import (AdmissibilityReport, SpeedFunction, SpeedInvariants,
                     compute_invariants, evaluate, gauss_power, get_speed,
                     harmonic_mean_curvature, mean_curvature, power_mean,
                     scalar_curvature, verify_admissibility)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # speeds
    "SpeedFunction", "SpeedInvariants", "AdmissibilityReport",
    "evaluate", "compute_invariants", "verify_admissibility", "get_speed",
    "mean_curvature", "harmonic_mean_curvature", "scalar_curvature",
    "gauss_power", "power_mean",
    # expressions
    "SpeedExpr", "parse_speed", "measure_homogeneity",
    # constraint
    "ConstraintContext", "constraint_context", "solve_g", "solve_g1",
    "tail_limit", "tail_decay_exponent", "TailDecay",
    # level sets
    "BarrierCurve", "level_value", "w_of_r", "dw_dr", "asymptotic_exponents",
    # ODE
    "IntegrationConfig", "ProfileSolution", "ReachedHorizon", "BlewUpAt",
    "LeftDomain", "rhs", "integrate", "slope_at_origin", "start_convergence",
    "ConvergenceReport",
    # profiles
    "BowlProfile", "AsymptoticFit", "ConvexityReport", "recover_u",
    "curvatures", "residual", "fit_asymptotics", "check_convexity",
    # classification
    "Classification", "ValidationReport", "classify", "cross_validate",
    # errors
    "BowlforgeError", "DomainError", "OutOfDomain", "BracketFailure",
    "NonConvergentLimit", "NonConvergent", "NotApplicable", "ParseError",
    "DimensionError", "NotHomogeneous", "StartupFailure",
]
