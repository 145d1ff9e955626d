"""Grid checks of the sufficient conditions for a candidate value ``R_alpha psi``.

For a stopping problem ``sup_tau E_x[int_0^tau e^{-alpha t} f(X_t) dt + e^{-alpha tau} g(X_tau)]``
a function ``psi`` certifies ``R_alpha psi`` as the value function, with the
exit time of ``D = {R_alpha psi > g}`` optimal, when

(i)   ``R_alpha psi >= g`` on the state space,
(ii)  ``psi >= f`` on the state space,
(iv)  ``psi = f`` on ``D``,

plus a uniform-integrability condition along stopping times before the exit
from ``D``. The first three are checked pointwise here; the last is only
probed empirically (see :func:`optstop.mc.ui_tail_proxy`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .kernels import ProcessKind
from .piecewise import PiecewiseFunction
from .resolvent import check_alpha, resolvent_numeric

# grid points with value - payoff above this are in the continuation region
REGION_EPS = 1e-12


@dataclass(frozen=True)
class StoppingProblem:
    """Running payoff ``f``, terminal payoff ``g``, discount ``alpha`` for ``kind``."""

    kind: ProcessKind
    f: PiecewiseFunction
    g: PiecewiseFunction
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "kind", ProcessKind.parse(self.kind))
        object.__setattr__(self, "alpha", check_alpha(self.alpha))


@dataclass(frozen=True)
class ContinuationRegion:
    """Finite union of disjoint intervals of the state space.

    Each interval is ``(lo, hi, lo_closed, hi_closed)``.
    """

    intervals: tuple[tuple[float, float, bool, bool], ...]
    state_space: tuple[float, float] = (-np.inf, np.inf)

    @classmethod
    def empty(cls, kind: ProcessKind = ProcessKind.STANDARD) -> "ContinuationRegion":
        return cls((), ProcessKind.parse(kind).state_space)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = np.zeros(x.shape, dtype=bool)
        for lo, hi, lo_closed, hi_closed in self.intervals:
            above = x >= lo if lo_closed else x > lo
            below = x <= hi if hi_closed else x < hi
            inside |= above & below
        return inside

    @property
    def boundaries(self) -> tuple[float, ...]:
        """Finite interval endpoints that are not ends of the state space."""
        lo_ss, hi_ss = self.state_space
        pts = []
        for lo, hi, _, _ in self.intervals:
            for p in (lo, hi):
                if np.isfinite(p) and p not in (lo_ss, hi_ss):
                    pts.append(float(p))
        return tuple(sorted(set(pts)))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def to_dict(self) -> dict:
        return {
            "intervals": [
                {"lo": _json_float(lo), "hi": _json_float(hi),
                 "lo_closed": lc, "hi_closed": hc}
                for lo, hi, lc, hc in self.intervals
            ],
            "state_space": [_json_float(v) for v in self.state_space],
        }

    def arrays(self):
        """Interval arrays ``(lo, hi, lo_closed, hi_closed)`` for compiled kernels."""
        n = len(self.intervals)
        lo = np.array([iv[0] for iv in self.intervals], dtype=float).reshape(n)
        hi = np.array([iv[1] for iv in self.intervals], dtype=float).reshape(n)
        lc = np.array([iv[2] for iv in self.intervals], dtype=bool).reshape(n)
        hc = np.array([iv[3] for iv in self.intervals], dtype=bool).reshape(n)
        return lo, hi, lc, hc


def _json_float(v: float):
    if np.isposinf(v):
        return "inf"
    if np.isneginf(v):
        return "-inf"
    return float(v)


@dataclass(frozen=True)
class StoppingRule:
    """Stop as soon as the state leaves the continuation region."""

    region: ContinuationRegion

    def __call__(self, x) -> np.ndarray:
        return self.should_stop(x)

    def should_stop(self, x) -> np.ndarray:
        return ~self.region.contains(x)

    @classmethod
    def stop_always(cls, kind: ProcessKind = ProcessKind.STANDARD) -> "StoppingRule":
        return cls(ContinuationRegion.empty(kind))


def stopping_rule(region: ContinuationRegion) -> StoppingRule:
    """``tau_D``: stop iff the state is outside ``region`` (so at once if it starts outside)."""
    return StoppingRule(region)


def threshold_region(kind: ProcessKind, x0: float, *, continue_above: bool) -> ContinuationRegion:
    """Half-line continuation region cut at ``x0`` (open at ``x0``)."""
    kind = ProcessKind.parse(kind)
    lower = kind.lower
    if continue_above:
        intervals = ((x0, np.inf, False, False),)
    else:
        if x0 <= lower:
            return ContinuationRegion.empty(kind)
        # the barrier itself: reflected paths continue from 0, absorbed ones are stopped there
        closed_at_barrier = kind is ProcessKind.REFLECTED
        intervals = ((lower, x0, closed_at_barrier, False),)
    return ContinuationRegion(intervals, kind.state_space)


# ---------------------------------------------------------------------------


class NumericResolvent:
    """``x -> R_alpha psi(x)`` computed by quadrature; usable as a candidate value."""

    def __init__(self, kind: ProcessKind, alpha: float, psi: PiecewiseFunction, tol: float = 1e-8):
        self.kind = ProcessKind.parse(kind)
        self.alpha = check_alpha(alpha)
        self.psi = psi
        self.tol = tol

    @property
    def knots(self) -> tuple[float, ...]:
        return self.psi.breakpoints

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.array([resolvent_numeric(self.kind, self.alpha, self.psi, xi, self.tol)
                        for xi in x.ravel()]).reshape(x.shape)
        return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class Candidate:
    problem: StoppingProblem
    psi: PiecewiseFunction
    value: Callable

    @property
    def knots(self) -> tuple[float, ...]:
        return tuple(getattr(self.value, "knots", ()))


def build_candidate(problem: StoppingProblem, psi: PiecewiseFunction, value=None) -> Candidate:
    """Pair ``psi`` with its resolvent.

    ``value`` may be an analytic callable (e.g. a ClosedFormValue); when
    omitted the resolvent is computed by quadrature.
    """
    if value is None:
        value = NumericResolvent(problem.kind, problem.alpha, psi)
    return Candidate(problem, psi, value)


@dataclass(frozen=True)
class Check:
    passed: bool
    margin: float

    def to_dict(self) -> dict:
        return {"passed": bool(self.passed), "margin": float(self.margin)}


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of :func:`check_conditions`.

    Margins: ``cond_i`` and ``cond_ii`` hold the smallest slack
    (``min(R psi - g)``, ``min(psi - f)``; negative means violated),
    ``cond_iv`` the largest ``|psi - f|`` on ``D``, ``continuity`` the largest
    value jump and ``smooth_pasting`` the largest one-sided derivative gap at
    the inspected boundary points.
    """

    cond_i: Check
    cond_ii: Check
    cond_iv: Check
    continuity: Check
    smooth_pasting: Check
    region: ContinuationRegion
    grid: np.ndarray
    boundary_points: tuple[float, ...]
    tol: float
    deriv_tol: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in (self.cond_i, self.cond_ii, self.cond_iv,
                                      self.continuity, self.smooth_pasting))

    def failures(self) -> list[str]:
        names = ("cond_i", "cond_ii", "cond_iv", "continuity", "smooth_pasting")
        return [n for n in names if not getattr(self, n).passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "cond_i": self.cond_i.to_dict(),
            "cond_ii": self.cond_ii.to_dict(),
            "cond_iv": self.cond_iv.to_dict(),
            "continuity_at_boundary": self.continuity.to_dict(),
            "smooth_pasting": self.smooth_pasting.to_dict(),
            "region": self.region.to_dict(),
            "boundary_points": [float(b) for b in self.boundary_points],
            "grid": [float(x) for x in self.grid],
            "tol": self.tol,
            "deriv_tol": self.deriv_tol,
        }


def _refine(pred: Callable[[float], bool], a: float, b: float, iters: int = 60) -> float:
    """Bisection for the switch of a boolean predicate between ``a`` and ``b``."""
    pa = pred(a)
    for _ in range(iters):
        m = 0.5 * (a + b)
        if m in (a, b):
            break
        if pred(m) == pa:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def _region_from_grid(grid, in_d, gap_fn, kind: ProcessKind, eps: float):
    lower, upper = kind.state_space
    pred = lambda x: bool(gap_fn(x) > eps)  # noqa: E731
    intervals = []
    i, n = 0, len(grid)
    while i < n:
        if not in_d[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and in_d[j + 1]:
            j += 1
        if i == 0:
            lo = lower if grid[0] > lower else grid[0]
            lo_closed = bool(np.isfinite(lo))
        else:
            lo, lo_closed = _refine(pred, grid[i - 1], grid[i]), False
        if j == n - 1:
            hi, hi_closed = upper, False
        else:
            hi, hi_closed = _refine(pred, grid[j], grid[j + 1]), False
        intervals.append((float(lo), float(hi), lo_closed, hi_closed))
        i = j + 1
    return ContinuationRegion(tuple(intervals), kind.state_space)


def _snap(points, knots, spacing):
    out = []
    for p in points:
        near = [k for k in knots if abs(k - p) <= spacing]
        out.append(min(near, key=lambda k: abs(k - p)) if near else p)
    return out


def check_conditions(
    candidate: Candidate,
    grid: Sequence[float],
    tol: float = 1e-6,
    *,
    deriv_tol: float = 1e-4,
    h: float = 1e-6,
    eps: float = REGION_EPS,
) -> VerificationReport:
    """Evaluate conditions (i), (ii), (iv), continuity and smooth pasting on ``grid``.

    ``D`` is the set of grid points where ``value - g > eps (1 + |g|)``, with
    ``eps`` raised to ten times ``value.tol`` for quadrature candidates; its edges are
    located by bisection between neighbouring grid points, and runs reaching
    the ends of the grid are taken to extend to the ends of the state space.
    Continuity and C1 pasting are inspected at every edge of ``D`` (snapped to
    a nearby kink of the candidate when there is one) and at the candidate's
    own threshold(s) inside the grid.
    """
    problem = candidate.problem
    kind = problem.kind
    grid = np.asarray(sorted(set(float(x) for x in grid)))
    if grid.size < 3:
        raise ValueError("grid needs at least three points")
    kind.check_states(grid)
    value = candidate.value
    v = np.asarray(value(grid), dtype=float)
    gx = np.asarray(problem.g(grid), dtype=float)
    psi = np.asarray(candidate.psi(grid), dtype=float)
    fx = np.asarray(problem.f(grid), dtype=float)

    gap = v - gx
    cond_i = Check(bool(gap.min() >= -tol), float(gap.min()))
    dom = psi - fx
    cond_ii = Check(bool(dom.min() >= -tol), float(dom.min()))
    # numerical candidates carry their own noise floor
    eps = max(eps, 10.0 * float(getattr(value, "tol", 0.0)))
    in_d = gap > eps * (1.0 + np.abs(gx))
    dev = float(np.abs(psi - fx)[in_d].max()) if in_d.any() else 0.0
    cond_iv = Check(bool(dev <= tol), dev)

    region = _region_from_grid(
        grid, in_d, lambda x: float(value(np.array([x]))[0] - problem.g(x)) / (1.0 + abs(float(problem.g(x)))),
        kind, eps)
    spacing = float(np.max(np.diff(grid)))
    knots = [k for k in candidate.knots if grid[0] <= k <= grid[-1]]
    edges = region.boundaries
    snapped = dict(zip(edges, _snap(edges, knots, spacing)))
    region = ContinuationRegion(
        tuple((snapped.get(lo, lo), snapped.get(hi, hi), lc, hc) for lo, hi, lc, hc in region.intervals),
        region.state_space)
    points = sorted(set(snapped.values()) | set(knots))

    jump = slope_gap = 0.0
    delta = 1e-3 * h
    inspected = []
    for b in points:
        if b - h < kind.lower:
            continue
        inspected.append(b)
        x = np.array([b - h, b - delta, b + delta, b + h])
        vb = np.asarray(value(x), dtype=float)
        jump = max(jump, abs(vb[2] - vb[1]))
        left = (vb[1] - vb[0]) / (h - delta)
        right = (vb[3] - vb[2]) / (h - delta)
        slope_gap = max(slope_gap, abs(right - left))
    return VerificationReport(
        cond_i, cond_ii, cond_iv,
        Check(bool(jump <= tol), float(jump)),
        Check(bool(slope_gap <= deriv_tol), float(slope_gap)),
        region, grid, tuple(inspected), tol, deriv_tol,
    )
