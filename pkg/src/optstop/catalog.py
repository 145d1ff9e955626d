"""The four worked stopping problems, assembled from their pieces."""

from __future__ import annotations

from dataclasses import dataclass

from .free_boundary import ThresholdSolution, solve_threshold
from .piecewise import PiecewiseFunction
from .resolvent import ClosedFormValue, ExampleId, check_alpha, resolvent_closed_form
from .verification import (
    Candidate,
    ContinuationRegion,
    StoppingProblem,
    build_candidate,
    threshold_region,
)


@dataclass(frozen=True)
class ExampleBundle:
    """Problem data, candidate ``psi`` and its closed-form resolvent at threshold ``x0``."""

    example_id: ExampleId
    problem: StoppingProblem
    x0: float
    psi: PiecewiseFunction
    value: ClosedFormValue
    region: ContinuationRegion
    solution: ThresholdSolution | None

    @property
    def candidate(self) -> Candidate:
        return build_candidate(self.problem, self.psi, self.value)


def problem_for(example_id, alpha: float) -> StoppingProblem:
    eid = ExampleId.parse(example_id)
    alpha = check_alpha(alpha)
    if eid is ExampleId.LINEAR_RUNNING:
        return StoppingProblem(eid.kind, PiecewiseFunction.linear(1.0), PiecewiseFunction.constant(0.0), alpha)
    return StoppingProblem(eid.kind, PiecewiseFunction.constant(0.0), PiecewiseFunction.linear(1.0), alpha)


def candidate_psi(example_id, alpha: float, x0: float) -> PiecewiseFunction:
    """``x 1{x > x0}`` for the running problem, ``alpha x 1{x >= x0}`` otherwise."""
    eid = ExampleId.parse(example_id)
    if eid is ExampleId.LINEAR_RUNNING:
        return PiecewiseFunction.linear_above(x0, 1.0, include_x0=False)
    return PiecewiseFunction.linear_above(x0, check_alpha(alpha))


def build_example(example_id, alpha: float, x0: float | None = None) -> ExampleBundle:
    """Bundle for ``example_id``; ``x0`` defaults to the optimal threshold.

    A non-optimal ``x0`` gives the value of the corresponding threshold rule,
    which is what the verification checks are expected to reject.
    """
    eid = ExampleId.parse(example_id)
    alpha = check_alpha(alpha)
    solution = None
    if x0 is None:
        solution = solve_threshold(eid, alpha)
        x0 = solution.x0
    x0 = float(x0)
    value = resolvent_closed_form(eid, alpha, x0)
    region = threshold_region(eid.kind, x0, continue_above=eid is ExampleId.LINEAR_RUNNING)
    return ExampleBundle(eid, problem_for(eid, alpha), x0, candidate_psi(eid, alpha, x0),
                         value, region, solution)
