"""Transition kernels and exact path samplers for three Brownian motions.

* ``STANDARD``: Brownian motion on the real line.
* ``REFLECTED``: ``|B|``, Brownian motion reflected upward at 0.
* ``ABSORBED``: Brownian motion frozen at 0 from its first visit there.

All densities are the classical image-method kernels and are vectorised
over ``x``, ``y`` and ``t``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numba
import numpy as np
from scipy.special import erf

from .rng import PathStream, normal_pair, uniform_at

_SQRT_2PI = np.sqrt(2.0 * np.pi)
# Below this exponent exp() is subnormal or zero; return an exact 0 instead.
_MIN_EXPONENT = -745.0


class DomainError(ValueError):
    """A state, time or parameter outside the admissible domain."""


class ProcessKind(enum.Enum):
    STANDARD = 0
    REFLECTED = 1
    ABSORBED = 2

    @property
    def lower(self) -> float:
        """Left end of the state space (the barrier for the two bounded kinds)."""
        return -np.inf if self is ProcessKind.STANDARD else 0.0

    @property
    def state_space(self) -> tuple[float, float]:
        return (self.lower, np.inf)

    @property
    def images(self) -> tuple[tuple[float, float], ...]:
        """``(sign of start, weight)`` of each Gaussian in the image sum."""
        if self is ProcessKind.STANDARD:
            return ((1.0, 1.0),)
        if self is ProcessKind.REFLECTED:
            return ((1.0, 1.0), (-1.0, 1.0))
        return ((1.0, 1.0), (-1.0, -1.0))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.isfinite(x) & (x >= self.lower)

    def check_states(self, *states) -> None:
        for s in states:
            if not np.all(self.contains(s)):
                raise DomainError(f"state outside {self.name} state space {self.state_space}: {s!r}")

    @classmethod
    def parse(cls, value) -> "ProcessKind":
        if isinstance(value, cls):
            return value
        try:
            return cls[str(value).upper()]
        except KeyError:
            raise ValueError(f"unknown process kind {value!r}") from None


@dataclass(frozen=True)
class DensityQuery:
    """Start state ``x``, end state ``y`` and elapsed time ``t > 0``."""

    x: float
    y: float
    t: float

    def __post_init__(self):
        if not (np.isfinite(self.t) and self.t > 0):
            raise DomainError(f"time must be positive and finite, got {self.t!r}")


def _check_time(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t) & (t > 0)):
        raise DomainError(f"time must be positive and finite, got {t!r}")
    return t


def _gauss(exponent):
    exponent = np.asarray(exponent, dtype=float)
    return np.where(exponent < _MIN_EXPONENT, 0.0, np.exp(np.maximum(exponent, _MIN_EXPONENT)))


def transition_density(kind: ProcessKind, x, y=None, t=None):
    """Density ``p_t(x, y)`` of ``X_t`` at ``y`` for ``X_0 = x``.

    Accepts either ``(x, y, t)`` (broadcast arrays) or a single
    :class:`DensityQuery` in place of ``x``.

    For the absorbed motion this is the density of the part of the law that
    has not yet reached 0 (the atom at 0 is excluded), so it integrates to
    :func:`survival_probability`.
    """
    if isinstance(x, DensityQuery):
        x, y, t = x.x, x.y, x.t
    kind = ProcessKind.parse(kind)
    t = _check_time(t)
    kind.check_states(x, y)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    direct = _gauss(-((y - x) ** 2) / (2.0 * t))
    if kind is ProcessKind.STANDARD:
        out = direct
    else:
        # image term relative to the direct one: exp(-2xy/t)
        ratio = _gauss(-2.0 * x * y / t)
        out = direct * (1.0 + ratio) if kind is ProcessKind.REFLECTED else direct * (1.0 - ratio)
        if kind is ProcessKind.ABSORBED:
            # 1 - exp(-a) evaluated without cancellation for small a
            out = np.where(ratio > 0.5, direct * -np.expm1(-2.0 * x * y / t), out)
    out = out / (_SQRT_2PI * np.sqrt(t))
    return out[()] if out.ndim == 0 else out


def survival_probability(kind: ProcessKind, x, t):
    """Probability that the process is still alive (not absorbed) at time ``t``."""
    kind = ProcessKind.parse(kind)
    t = _check_time(t)
    kind.check_states(x)
    x = np.asarray(x, dtype=float)
    if kind is ProcessKind.ABSORBED:
        out = erf(x / np.sqrt(2.0 * t))
    else:
        out = np.ones(np.broadcast(x, t).shape)
    return out[()] if np.ndim(out) == 0 else out


def kernel_cdf(kind: ProcessKind, x, y, t):
    """``P_x(X_t <= y)`` including, for the absorbed kind, the atom at 0."""
    kind = ProcessKind.parse(kind)
    t = _check_time(t)
    kind.check_states(x, y)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = np.sqrt(2.0 * t)
    if kind is ProcessKind.STANDARD:
        return 0.5 * (1.0 + erf((y - x) / s))
    if kind is ProcessKind.REFLECTED:
        return 0.5 * (erf((y - x) / s) + erf((y + x) / s))
    # atom at 0 plus the surviving mass in (0, y]
    alive_below = 0.5 * (erf((y - x) / s) - erf((y + x) / s)) + erf(x / s)
    return (1.0 - erf(x / s)) + alive_below


# ---------------------------------------------------------------------------
# Path sampling


@numba.njit(cache=True)
def step_state(kind, prev_s, s, absorbed, bridge, dt, seed, stream, step):
    """Advance the observed state given the underlying standard path.

    Returns ``(state, absorbed)``. ``prev_s`` and ``s`` are consecutive values
    of the underlying unreflected path.
    """
    if kind == 0:
        return s, False
    if kind == 1:
        return abs(s), False
    if absorbed:
        return 0.0, True
    if s <= 0.0:
        return 0.0, True
    if bridge and prev_s > 0.0:
        # probability that a Brownian bridge between two positive points touches 0
        expo = -2.0 * prev_s * s / dt
        if expo > -50.0 and uniform_at(seed, stream, step) < np.exp(expo):
            return 0.0, True
    return s, False


@numba.njit(cache=True)
def _sample_kernel(kind, x0, dt, n_steps, seed, first_path, n_paths, antithetic, bridge, every):
    n_rec = n_steps // every + 1
    states = np.zeros((n_paths, n_rec))
    absorbed_at = np.full(n_paths, -1, dtype=np.int64)
    sq = np.sqrt(dt)
    useed = np.uint64(seed)
    for i in range(n_paths):
        p = first_path + i
        stream = np.uint64(p // 2 if antithetic else p)
        scale = -sq if (antithetic and p % 2 == 1) else sq
        s = x0
        if kind == 2 and x0 <= 0.0:
            absorbed_at[i] = 0
            continue
        states[i, 0] = x0
        absorbed = False
        z1 = 0.0
        countdown = every
        rec = 0
        for n in range(n_steps):
            if n & 1 == 0:
                z0, z1 = normal_pair(useed, stream, n >> 1)
                z = z0
            else:
                z = z1
            prev = s
            s = prev + scale * z
            state, absorbed = step_state(kind, prev, s, False, bridge, dt, useed, stream, n)
            countdown -= 1
            if countdown == 0:
                rec += 1
                states[i, rec] = state
                countdown = every
            if absorbed:
                absorbed_at[i] = n + 1
                break
    return states, absorbed_at


@dataclass
class SampledPaths:
    """States of a batch of paths on a (possibly thinned) time grid.

    ``absorbed_step`` is the grid step of absorption (``-1`` if never);
    only meaningful for the absorbed kind.
    """

    times: np.ndarray
    states: np.ndarray
    absorbed_step: np.ndarray
    dt: float

    @property
    def absorbed(self) -> np.ndarray:
        return self.absorbed_step >= 0


@dataclass
class Path:
    times: np.ndarray
    states: np.ndarray
    absorbed: bool
    absorption_time: float | None


def _n_steps(dt: float, horizon: float) -> int:
    if not (dt > 0 and np.isfinite(dt)):
        raise DomainError("dt must be positive")
    if not horizon >= dt:
        raise DomainError("horizon must be at least dt")
    return int(round(horizon / dt))


def sample_paths(
    kind: ProcessKind,
    x0: float,
    dt: float,
    horizon: float,
    n_paths: int,
    seed: int = 0,
    *,
    first_path: int = 0,
    record_every: int = 1,
    antithetic: bool = False,
    bridge: bool = True,
) -> SampledPaths:
    """Simulate ``n_paths`` paths exactly on the grid ``k * dt``.

    Path ``first_path + i`` uses substream ``(seed, first_path + i)`` (or, with
    ``antithetic``, the negated increments of its even partner), so a given
    path is identical whatever batch it is simulated in. The absorbed kind
    uses the Brownian-bridge test for excursions to 0 between grid points
    unless ``bridge`` is False.
    """
    kind = ProcessKind.parse(kind)
    kind.check_states(x0)
    n_steps = _n_steps(dt, horizon)
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    states, absorbed_at = _sample_kernel(
        kind.value, float(x0), float(dt), n_steps, int(seed), int(first_path),
        int(n_paths), bool(antithetic), bool(bridge), int(record_every),
    )
    times = np.arange(states.shape[1]) * record_every * dt
    return SampledPaths(times, states, absorbed_at, dt)


def sample_path(
    kind: ProcessKind,
    x0: float,
    dt: float,
    horizon: float,
    stream: PathStream,
    *,
    bridge: bool = True,
) -> Path:
    """One path on the full grid, driven by the substream ``stream``."""
    batch = sample_paths(kind, x0, dt, horizon, 1, stream.seed,
                         first_path=stream.index, bridge=bridge)
    step = int(batch.absorbed_step[0])
    return Path(
        batch.times,
        batch.states[0],
        step >= 0,
        step * dt if step >= 0 else None,
    )
