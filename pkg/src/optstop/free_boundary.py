"""Optimal thresholds of the worked examples.

Every threshold equation depends on the state only through ``u = sqrt(2 alpha) x``:

========  ===========================  =====================
example   equation in ``u``            root
========  ===========================  =====================
running   ``u = -1``                   closed form
stopped   ``u = 1``                    closed form
reflected ``tanh(u) = 1/u``            ``u ~ 1.19968``
absorbed  ``coth(u) = 1/u``            none with ``u > 0``
========  ===========================  =====================

``coth(u) = 1/u`` is ``tanh(u) = u``, and ``tanh(u) < u`` for every ``u > 0``,
so the absorbed problem has no interior threshold: stopping at once is
optimal, which is reported as ``x0 = 0`` with status ``NO_POSITIVE_ROOT``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .resolvent import ExampleId, check_alpha

BRACKET = (1e-6, 10.0)
MAX_ITER = 200

ABSORBED_NOTE = (
    "discrepancy: coth(u) = 1/u is equivalent to tanh(u) = u, which has no root "
    "with u > 0 because tanh(u) < u there; a positive root of this equation is "
    "sometimes claimed (alongside a negative one) but does not exist. x0 = 0 is "
    "returned as the degenerate boundary: stopping at once is optimal."
)


class ThresholdStatus(enum.Enum):
    CLOSED_FORM = "ClosedForm"
    ROOT_FOUND = "RootFound"
    NO_POSITIVE_ROOT = "NoPositiveRoot"


@dataclass(frozen=True)
class ThresholdSolution:
    example_id: ExampleId
    alpha: float
    x0: float
    u: float
    status: ThresholdStatus
    residual: float
    note: str = ""

    def to_dict(self) -> dict:
        out = {
            "example": self.example_id.value,
            "alpha": self.alpha,
            "x0": self.x0,
            "u": self.u,
            "status": self.status.value,
            "residual": self.residual,
        }
        if self.note:
            out["note"] = self.note
        return out


def reflected_equation(u):
    """``u tanh(u) - 1``; its positive zero is the reflected threshold."""
    return u * np.tanh(u) - 1.0


def absorbed_equation(u):
    """``tanh(u) - u``; strictly negative for ``u > 0``."""
    return np.tanh(u) - u


def solve_threshold(example_id, alpha: float, tol: float = 1e-12) -> ThresholdSolution:
    """Optimal stopping threshold ``x0`` for one of the worked examples.

    The reflected root is found by Brent's method on ``[1e-6, 10]`` with
    ``tol`` on the bracket width; the returned solution also carries the
    equation residual at the root.
    """
    eid = ExampleId.parse(example_id)
    alpha = check_alpha(alpha)
    if tol <= 0:
        raise ValueError("tol must be positive")
    k = float(np.sqrt(2.0 * alpha))
    if eid is ExampleId.LINEAR_RUNNING:
        return ThresholdSolution(eid, alpha, -1.0 / k, -1.0, ThresholdStatus.CLOSED_FORM, 0.0)
    if eid is ExampleId.LINEAR_STOPPED:
        return ThresholdSolution(eid, alpha, 1.0 / k, 1.0, ThresholdStatus.CLOSED_FORM, 0.0)
    if eid is ExampleId.REFLECTED:
        u = reflected_root(tol)
        return ThresholdSolution(eid, alpha, float(u / k), u, ThresholdStatus.ROOT_FOUND,
                                 float(reflected_equation(u)))
    scan = absorbed_sign_scan()
    if scan["max"] >= 0.0:  # pragma: no cover - excluded by the analysis above
        raise RuntimeError("unexpected sign change of tanh(u) - u on the scan grid")
    return ThresholdSolution(eid, alpha, 0.0, 0.0, ThresholdStatus.NO_POSITIVE_ROOT,
                             float(absorbed_equation(0.0)), ABSORBED_NOTE)


def reflected_root(tol: float = 1e-12) -> float:
    lo, hi = BRACKET
    u, info = brentq(reflected_equation, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps,
                     maxiter=MAX_ITER, full_output=True)
    if not info.converged:  # pragma: no cover
        raise RuntimeError(f"Brent iteration failed: {info.flag}")
    residual = abs(reflected_equation(u))
    if residual > max(tol, 16 * np.finfo(float).eps):  # pragma: no cover
        raise RuntimeError(f"root residual {residual:.3g} above tolerance {tol:.3g}")
    return float(u)


def absorbed_sign_scan(n: int = 100_000) -> dict:
    """Sign of ``tanh(u) - u`` on a uniform grid of ``(0, 10]``."""
    u = np.linspace(BRACKET[1] / n, BRACKET[1], n)
    h = absorbed_equation(u)
    return {"n": n, "max": float(h.max()), "sign_changes": int(np.sum(np.diff(np.sign(h)) != 0))}


@dataclass(frozen=True)
class ThresholdOrdering:
    alpha: float
    absorbed: float
    standard: float
    reflected: float

    @property
    def strictly_increasing(self) -> bool:
        return self.absorbed < self.standard < self.reflected

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.absorbed, self.standard, self.reflected)


def threshold_ordering(alpha: float) -> ThresholdOrdering:
    """Thresholds of the stopped-payoff problems for the three motions."""
    return ThresholdOrdering(
        check_alpha(alpha),
        solve_threshold(ExampleId.ABSORBED, alpha).x0,
        solve_threshold(ExampleId.LINEAR_STOPPED, alpha).x0,
        solve_threshold(ExampleId.REFLECTED, alpha).x0,
    )
