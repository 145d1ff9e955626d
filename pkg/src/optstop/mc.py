"""Monte Carlo estimates of discounted stopping payoffs.

Paths are simulated exactly on a grid of multiples of ``dt`` and the stopping
rule is checked at every grid time. Far from every boundary that matters
(rule edges, the barrier at 0, kinks of the running payoff) the stepper skips
ahead by ``2^j dt`` as long as the boundary stays at least ``SKIP_SIGMAS``
standard deviations of the coarse increment away, which changes the law of
the monitored stopping time only on events of probability ~1e-12 per step.

The discounted running payoff is integrated exactly against the
piecewise-linear interpolant of ``f`` between monitoring times (trapezoid in
the state, exact in the discount factor).

Every draw is keyed by ``(seed, path index, grid index)``, so estimates are
bit-identical for a given configuration however the paths are batched.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numba
import numpy as np
from scipy.interpolate import CubicSpline

from .kernels import DomainError, ProcessKind, _n_steps, step_state
from .piecewise import PiecewiseFunction
from .resolvent import check_alpha, resolvent_numeric
from .rng import normal_pair
from .verification import ContinuationRegion, StoppingProblem, StoppingRule, stopping_rule, threshold_region

if "NUMBA_THREADING_LAYER" not in os.environ:
    # avoid probing an outdated TBB first; the parallel loop is order-independent anyway
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

SKIP_SIGMAS = 7.0
CHUNK = 32_768


@dataclass(frozen=True)
class McConfig:
    """Simulation settings; ``horizon=None`` means ``40 / alpha``."""

    paths: int = 100_000
    dt: float = 1e-3
    horizon: float | None = None
    seed: int = 0
    antithetic: bool = False
    max_skip: int = 1024

    def __post_init__(self):
        if int(self.paths) < 1:
            raise DomainError("paths must be >= 1")
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise DomainError("dt must be positive")
        if self.horizon is not None and not self.horizon >= self.dt:
            raise DomainError("horizon must be >= dt")
        if self.antithetic and self.paths % 2:
            raise DomainError("antithetic sampling needs an even number of paths")
        if self.max_skip < 1 or self.max_skip & (self.max_skip - 1):
            raise DomainError("max_skip must be a power of two")

    def resolved_horizon(self, alpha: float) -> float:
        return float(self.horizon) if self.horizon is not None else 40.0 / alpha


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    paths_used: int
    truncation_bound: float = 0.0

    def within(self, target: float, n_sigma: float = 3.0) -> bool:
        return abs(self.mean - target) <= n_sigma * self.stderr + self.truncation_bound

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "paths_used": self.paths_used,
                "truncation_bound": self.truncation_bound}


# ---------------------------------------------------------------------------
# compiled core


@numba.njit(cache=True)
def _pw_eval(x, bp, coeffs, left_closed):
    i = 0
    for b in bp:
        if x > b or (left_closed and x == b):
            i += 1
    v = 0.0
    for j in range(coeffs.shape[1] - 1, -1, -1):
        v = v * x + coeffs[i, j]
    return v


@numba.njit(cache=True)
def _discount_weights(a, h):
    """Weights ``(w0, w1)`` with ``int_0^h e^{-a s} (f0 (1 - s/h) + f1 s/h) ds = w0 f0 + w1 f1``."""
    x = a * h
    if x < 0.05:
        # 1 - e^{-x}(1 + x) = sum_{n>=2} (-1)^n (n - 1) x^n / n!
        c = 0.0
        term = 1.0
        for n in range(1, 12):
            term *= x / n
            if n >= 2:
                c += (-1.0) ** n * (n - 1) * term
        total = h * (-np.expm1(-x) / x) if x > 0.0 else h
    else:
        c = 1.0 - np.exp(-x) * (1.0 + x)
        total = -np.expm1(-x) / a
    w1 = c / (a * a * h) if x > 0.0 else 0.5 * h
    return total - w1, w1


@numba.njit(cache=True)
def _inside(y, lo, hi, lc, hc, start, end):
    for j in range(start, end):
        above = y >= lo[j] if lc[j] else y > lo[j]
        below = y <= hi[j] if hc[j] else y < hi[j]
        if above and below:
            return True
    return False


@numba.njit(cache=True)
def _one_path(p, kind, x0, dt, n_steps, alpha, seed, antithetic, bridge,
              lo, hi, lc, hc, offsets, f_bp, f_c, f_lc, use_f, extra, max_skip,
              out_step, out_state, out_run, row):
    n_rules = offsets.shape[0] - 1
    stream = np.uint64(p // 2 if antithetic else p)
    sign = -1.0 if (antithetic and p % 2 == 1) else 1.0
    active = np.zeros(n_rules, dtype=np.bool_)
    n_active = 0
    dead = kind == 2 and x0 <= 0.0
    for r in range(n_rules):
        out_run[row, r] = 0.0
        if dead or not _inside(x0, lo, hi, lc, hc, offsets[r], offsets[r + 1]):
            out_step[row, r] = 0
            out_state[row, r] = 0.0 if dead else x0
        else:
            active[r] = True
            n_active += 1
    s = x0
    y = x0
    n = 0
    run = 0.0
    f_prev = _pw_eval(y, f_bp, f_c, f_lc) if use_f else 0.0
    cached = -1
    z0 = 0.0
    z1 = 0.0
    useed = np.uint64(seed)
    while n_active > 0 and n < n_steps:
        dist = np.inf
        for r in range(n_rules):
            if active[r]:
                for j in range(offsets[r], offsets[r + 1]):
                    if np.isfinite(lo[j]):
                        dist = min(dist, abs(y - lo[j]))
                    if np.isfinite(hi[j]):
                        dist = min(dist, abs(y - hi[j]))
        for e in extra:
            dist = min(dist, abs(y - e))
        m = 1
        while (2 * m <= max_skip and n + 2 * m <= n_steps
               and SKIP_SIGMAS * np.sqrt(2 * m * dt) <= dist):
            m *= 2
        blk = n >> 1
        if blk != cached:
            z0, z1 = normal_pair(useed, stream, blk)
            cached = blk
        z = z0 if (n & 1) == 0 else z1
        h = m * dt
        prev = s
        s = prev + sign * np.sqrt(h) * z
        y, absorbed = step_state(kind, prev, s, False, bridge, h, useed, stream, n)
        n += m
        if use_f:
            f_new = _pw_eval(y, f_bp, f_c, f_lc)
            w0, w1 = _discount_weights(alpha, h)
            run += np.exp(-alpha * (n - m) * dt) * (w0 * f_prev + w1 * f_new)
            f_prev = f_new
        for r in range(n_rules):
            if active[r] and (absorbed or not _inside(y, lo, hi, lc, hc, offsets[r], offsets[r + 1])):
                active[r] = False
                n_active -= 1
                out_step[row, r] = n
                out_state[row, r] = y
                out_run[row, r] = run
    for r in range(n_rules):
        if active[r]:
            out_step[row, r] = -1
            out_state[row, r] = y
            out_run[row, r] = run


@numba.njit(cache=True, parallel=True)
def _simulate(kind, x0, dt, n_steps, alpha, seed, first_path, n_paths, antithetic, bridge,
              lo, hi, lc, hc, offsets, f_bp, f_c, f_lc, use_f, extra, max_skip):
    n_rules = offsets.shape[0] - 1
    out_step = np.empty((n_paths, n_rules), dtype=np.int64)
    out_state = np.empty((n_paths, n_rules))
    out_run = np.empty((n_paths, n_rules))
    for i in numba.prange(n_paths):
        _one_path(first_path + i, kind, x0, dt, n_steps, alpha, seed, antithetic, bridge,
                  lo, hi, lc, hc, offsets, f_bp, f_c, f_lc, use_f, extra, max_skip,
                  out_step, out_state, out_run, i)
    return out_step, out_state, out_run


# ---------------------------------------------------------------------------


@dataclass
class RuleOutcomes:
    """Per-path, per-rule stop data; ``step == -1`` means not stopped by the horizon."""

    step: np.ndarray
    state: np.ndarray
    running: np.ndarray
    dt: float
    horizon: float

    @property
    def stopped(self) -> np.ndarray:
        return self.step >= 0

    @property
    def time(self) -> np.ndarray:
        """Stop time, or the horizon for paths still running."""
        return np.where(self.stopped, self.step * self.dt, self.horizon)


def simulate_rules(
    kind: ProcessKind,
    x: float,
    rules: Sequence[StoppingRule],
    cfg: McConfig,
    alpha: float,
    running: PiecewiseFunction | None = None,
    *,
    horizon: float | None = None,
    bridge: bool = True,
) -> RuleOutcomes:
    """Run every rule on the same simulated paths (common random numbers)."""
    kind = ProcessKind.parse(kind)
    kind.check_states(x)
    alpha = check_alpha(alpha)
    horizon = cfg.resolved_horizon(alpha) if horizon is None else horizon
    n_steps = _n_steps(cfg.dt, horizon)
    los, his, lcs, hcs, offsets = [], [], [], [], [0]
    for rule in rules:
        lo, hi, lc, hc = rule.region.arrays()
        los.append(lo), his.append(hi), lcs.append(lc), hcs.append(hc)
        offsets.append(offsets[-1] + lo.size)
    cat = lambda arrs, dt: np.concatenate(arrs).astype(dt) if arrs else np.zeros(0, dt)  # noqa: E731
    f = running if running is not None else PiecewiseFunction.constant(0.0)
    extra = list(f.breakpoints)
    if kind is not ProcessKind.STANDARD:
        extra.append(0.0)
    args = (
        cat(los, float), cat(his, float), cat(lcs, np.bool_), cat(hcs, np.bool_),
        np.asarray(offsets, dtype=np.int64),
        np.asarray(f.breakpoints, dtype=float), f.padded_coeffs(), bool(f.left_closed),
        not f.is_zero(), np.asarray(extra, dtype=float), int(cfg.max_skip),
    )
    parts = []
    for start in range(0, int(cfg.paths), CHUNK):
        count = min(CHUNK, int(cfg.paths) - start)
        parts.append(_simulate(kind.value, float(x), float(cfg.dt), n_steps, alpha, int(cfg.seed),
                               start, count, bool(cfg.antithetic), bool(bridge), *args))
    step, state, run = (np.concatenate([p[i] for p in parts]) for i in range(3))
    return RuleOutcomes(step, state, run, cfg.dt, n_steps * cfg.dt)


def _series_sup_brownian(alpha: float) -> float:
    """Upper bound for ``E sup_s e^{-alpha s} |W_s|`` via unit blocks."""
    j = np.arange(0, int(60.0 / alpha) + 2)
    return float(np.sum(np.exp(-alpha * j) * np.sqrt(np.pi * (j + 1) / 2.0)))


def truncation_bound(problem: StoppingProblem, x: float, horizon: float) -> float:
    """Bound on the payoff lost by ignoring everything after ``horizon``.

    Uses ``|f|, |g| <= a + b|y|`` and ``E|X_t| <= |x| + sqrt(t)``.
    """
    a_f, b_f = problem.f.linear_envelope()
    a_g, b_g = problem.g.linear_envelope()
    alpha = problem.alpha
    decay = np.exp(-alpha * horizon)
    reach = abs(x) + np.sqrt(horizon)
    run = (a_f + b_f * reach) / alpha + b_f / (2.0 * alpha**2 * np.sqrt(horizon))
    term = a_g + b_g * (reach + _series_sup_brownian(alpha))
    return float(decay * (run + term))


def _summarise(samples: np.ndarray, antithetic: bool, bound: float = 0.0) -> McEstimate:
    n = samples.size
    if np.all(samples == samples[0]):
        return McEstimate(float(samples[0]), 0.0, int(n), float(bound))
    if antithetic:
        pairs = 0.5 * (samples[0::2] + samples[1::2])
        sd = float(pairs.std(ddof=1)) if pairs.size > 1 else 0.0
        stderr = sd / np.sqrt(pairs.size)
    else:
        sd = float(samples.std(ddof=1)) if n > 1 else 0.0
        stderr = sd / np.sqrt(n)
    return McEstimate(float(samples.mean()), float(stderr), int(n), float(bound))


def payoff_samples(problem: StoppingProblem, rules: Sequence[StoppingRule], x: float,
                   cfg: McConfig) -> tuple[np.ndarray, float]:
    """Per-path discounted payoffs, shape ``(paths, len(rules))``, and the horizon."""
    out = simulate_rules(problem.kind, x, rules, cfg, problem.alpha, problem.f)
    term = np.exp(-problem.alpha * out.step * out.dt) * problem.g(out.state)
    return out.running + np.where(out.stopped, term, 0.0), out.horizon


def estimate_value(problem: StoppingProblem, rule: StoppingRule, x: float, cfg: McConfig) -> McEstimate:
    """Estimate ``E_x[int_0^tau e^{-alpha t} f(X_t) dt + e^{-alpha tau} g(X_tau)]``.

    Paths still running at the horizon contribute their running integral
    only; the neglected remainder is bounded by ``truncation_bound``.
    """
    samples, horizon = payoff_samples(problem, [rule], x, cfg)
    return _summarise(samples[:, 0], cfg.antithetic, truncation_bound(problem, x, horizon))


def threshold_rule(kind: ProcessKind, x0: float, *, continue_above: bool) -> StoppingRule:
    """Stop on first entry into ``(-inf, x0]`` (``continue_above``) or ``[x0, inf)``."""
    return stopping_rule(threshold_region(kind, x0, continue_above=continue_above))


@dataclass
class SweepResult:
    """Per-threshold estimates from one set of paths.

    ``indistinguishable`` lists the thresholds whose paired difference from
    the best estimate is within ``3`` standard errors of the difference.
    """

    thresholds: np.ndarray
    estimates: list[McEstimate]
    best_index: int
    diff_stderr: np.ndarray
    indistinguishable: tuple[float, ...] = field(default=())

    @property
    def best_threshold(self) -> float:
        return float(self.thresholds[self.best_index])

    @property
    def means(self) -> np.ndarray:
        return np.array([e.mean for e in self.estimates])

    @property
    def stderrs(self) -> np.ndarray:
        return np.array([e.stderr for e in self.estimates])

    def rows(self) -> list[tuple[float, McEstimate]]:
        return list(zip(map(float, self.thresholds), self.estimates))

    def to_dict(self) -> dict:
        return {
            "rows": [{"x0": x0, **est.to_dict(), "diff_stderr": float(d)}
                     for (x0, est), d in zip(self.rows(), self.diff_stderr)],
            "argmax": self.best_threshold,
            "indistinguishable": list(self.indistinguishable),
        }


def parse_thresholds(text: str) -> np.ndarray:
    """``"a:b:n"`` to ``n`` evenly spaced thresholds from ``a`` to ``b``."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise ValueError(f"thresholds must look like a:b:n, got {text!r}") from None
    if n < 1 or (n > 1 and not b > a):
        raise ValueError("need n >= 1 and b > a")
    return np.linspace(a, b, n)


def threshold_sweep(
    problem: StoppingProblem,
    thresholds: Sequence[float],
    x: float,
    cfg: McConfig,
    *,
    continue_above: bool | None = None,
) -> SweepResult:
    """Estimate every threshold rule on common paths and locate the best one.

    The continuation side defaults to "above" when the terminal payoff is
    zero (the running-payoff problem) and "below" otherwise.
    """
    thresholds = np.asarray(thresholds, dtype=float)
    problem.kind.check_states(thresholds)
    if continue_above is None:
        continue_above = problem.g.is_zero()
    rules = [threshold_rule(problem.kind, t, continue_above=continue_above) for t in thresholds]
    samples, horizon = payoff_samples(problem, rules, x, cfg)
    bound = truncation_bound(problem, x, horizon)
    estimates = [_summarise(samples[:, j], cfg.antithetic, bound) for j in range(len(rules))]
    best = int(np.argmax([e.mean for e in estimates]))
    diffs = samples - samples[:, [best]]
    diff_se = np.array([_summarise(diffs[:, j], cfg.antithetic).stderr for j in range(len(rules))])
    gaps = estimates[best].mean - np.array([e.mean for e in estimates])
    close = tuple(float(t) for t, g, d in zip(thresholds, gaps, diff_se) if g <= 3.0 * d)
    return SweepResult(thresholds, estimates, best, diff_se, close)


# ---------------------------------------------------------------------------
# Fukushima-Dynkin identity


@dataclass(frozen=True)
class TauSpec:
    """A simple stopping time: a fixed time ``t0`` or the first exit from ``(a, b)``."""

    kind: str
    t0: float = 0.0
    a: float = -np.inf
    b: float = np.inf

    @classmethod
    def fixed(cls, t0: float) -> "TauSpec":
        if not t0 > 0:
            raise DomainError("fixed time must be positive")
        return cls("fixed", t0=float(t0))

    @classmethod
    def exit_interval(cls, a: float, b: float) -> "TauSpec":
        if not a < b:
            raise DomainError("need a < b")
        return cls("exit", a=float(a), b=float(b))

    def region(self, kind: ProcessKind) -> ContinuationRegion:
        lower, upper = kind.state_space
        if self.kind == "fixed":
            return ContinuationRegion(((lower, upper, bool(np.isfinite(lower)), False),), kind.state_space)
        return ContinuationRegion(((self.a, self.b, False, False),), kind.state_space)


def interpolated_resolvent(kind: ProcessKind, alpha: float, psi: PiecewiseFunction,
                           lo: float, hi: float, spacing: float = 0.01,
                           tol: float = 1e-10) -> Callable:
    """Cubic-spline interpolant of ``R_alpha psi`` on ``[lo, hi]`` built from quadrature.

    Splines are fitted separately between breakpoints of ``psi``, where the
    resolvent is only C1.
    """
    kind = ProcessKind.parse(kind)
    cuts = [lo, *[b for b in psi.breakpoints if lo < b < hi], hi]
    pieces = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        n = max(4, int(np.ceil((b - a) / spacing)) + 1)
        xs = np.linspace(a, b, n)
        ys = np.array([resolvent_numeric(kind, alpha, psi, xi, tol) for xi in xs])
        pieces.append((a, b, CubicSpline(xs, ys)))

    def value(x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        for a, b, spline in pieces:
            mask = (x >= a) & (x <= b)
            out[mask] = spline(x[mask])
        if np.any((x < lo) | (x > hi)):
            raise DomainError("state outside the interpolation range")
        return out

    return value


def fukushima_dynkin_residual(
    kind: ProcessKind,
    psi: PiecewiseFunction,
    alpha: float,
    x: float,
    tau: TauSpec,
    cfg: McConfig,
    resolvent: Callable | None = None,
) -> McEstimate:
    """Estimate ``E[e^{-alpha tau} R psi(X_tau)] + E[int_0^tau e^{-alpha t} psi] - R psi(x)``.

    For an exit time the horizon of ``cfg`` caps ``tau``; the identity holds
    for ``tau ^ T`` as well, so no truncation error enters. Without an
    explicit ``resolvent`` one is interpolated from quadrature values over the
    range of sampled end states.
    """
    kind = ProcessKind.parse(kind)
    alpha = check_alpha(alpha)
    horizon = tau.t0 if tau.kind == "fixed" else None
    rule = stopping_rule(tau.region(kind))
    out = simulate_rules(kind, x, [rule], cfg, alpha, psi, horizon=horizon)
    end = out.state[:, 0]
    if resolvent is None:
        lo = min(end.min(), x) - 0.05
        if kind is not ProcessKind.STANDARD:
            lo = max(lo, 0.0)
        resolvent = interpolated_resolvent(kind, alpha, psi, lo, max(end.max(), x) + 0.05)
    t = out.time[:, 0]
    samples = (np.exp(-alpha * t) * resolvent(end) + out.running[:, 0]
               - float(np.asarray(resolvent(np.array([x])))[0]))
    return _summarise(samples, cfg.antithetic)


def ui_tail_proxy(
    problem: StoppingProblem,
    value: Callable,
    region: ContinuationRegion,
    x: float,
    cfg: McConfig,
    horizons: Sequence[float] = (1.0, 2.0, 5.0, 10.0, 20.0),
    levels: Sequence[float] = (1.0, 2.0, 5.0, 10.0),
) -> dict:
    """Empirical look at uniform integrability of ``e^{-alpha tau} value(X_tau)``.

    For ``tau = tau_D ^ T`` over several ``T`` it reports, per level ``K``,
    the largest ``E[Z; Z > K]`` with ``Z = |e^{-alpha tau} value(X_tau)|``.
    Values shrinking with ``K`` are consistent with the integrability
    condition; this is evidence, not a proof.
    """
    rule = stopping_rule(region)
    tails = {float(k): 0.0 for k in levels}
    for T in horizons:
        out = simulate_rules(problem.kind, x, [rule], cfg, problem.alpha, horizon=T)
        z = np.abs(np.exp(-problem.alpha * out.time[:, 0]) * value(out.state[:, 0]))
        for k in tails:
            tails[k] = max(tails[k], float(np.mean(np.where(z > k, z, 0.0))))
    return {"horizons": [float(h) for h in horizons], "tail_expectation": tails}
