"""Optimal stopping of Brownian motions through resolvent candidates.

Closed-form and quadrature resolvents, threshold solvers, grid verification
of the sufficient conditions, and a Monte Carlo oracle.
"""

from .catalog import ExampleBundle, build_example, candidate_psi, problem_for
from .free_boundary import (
    ThresholdOrdering,
    ThresholdSolution,
    ThresholdStatus,
    solve_threshold,
    threshold_ordering,
)
from .kernels import DensityQuery, DomainError, ProcessKind, kernel_cdf, sample_path, sample_paths, transition_density
from .mc import (
    McConfig,
    McEstimate,
    SweepResult,
    TauSpec,
    estimate_value,
    fukushima_dynkin_residual,
    threshold_rule,
    threshold_sweep,
)
from .piecewise import PiecewiseFunction
from .quadrature import QuadratureError
from .resolvent import (
    ClosedFormValue,
    ExampleId,
    erf_laplace_identity,
    erf_laplace_lhs,
    resolvent_closed_form,
    resolvent_numeric,
)
from .rng import PathStream
from .verification import (
    ContinuationRegion,
    StoppingProblem,
    StoppingRule,
    VerificationReport,
    build_candidate,
    check_conditions,
    stopping_rule,
)

__all__ = [name for name in dir() if not name.startswith("_")]
