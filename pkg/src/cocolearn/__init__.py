"""Online learning with adversarial constraints: constrained Hedge, cover
reduction and surrogate-gradient OGD, with synthetic environments and a
bound-checking experiment harness."""

from .core import (
    CcvTracker,
    LyapunovConfig,
    Normalizer,
    ProblemScale,
    ccv_update,
    lambda_budget,
    lambda_expert,
    lambda_smooth,
    lyapunov_derivative,
    normalize,
)
from .estimators import ConstrainedHedge, CoverCOCO, SmoothCOCO
from .exceptions import CocoError
from .geometry import Ball, Box, Cover, OracleSet, Simplex, build_cover, parse_set, project
from .harness import RunConfig, RunRecord, best_feasible_comparator, run, sweep

__version__ = "0.1.0"

__all__ = [
    "Ball", "Box", "CcvTracker", "CocoError", "ConstrainedHedge", "Cover", "CoverCOCO",
    "LyapunovConfig", "Normalizer", "OracleSet", "ProblemScale", "RunConfig", "RunRecord",
    "Simplex", "SmoothCOCO", "best_feasible_comparator", "build_cover", "ccv_update",
    "lambda_budget", "lambda_expert", "lambda_smooth", "lyapunov_derivative", "normalize",
    "parse_set", "project", "run", "sweep",
]
