"""Resolvents ``R_a psi(x) = E_x int_0^inf exp(-a t) psi(X_t) dt``.

Two independent routes are provided: :func:`resolvent_numeric` integrates
the transition kernel against ``psi`` by nested quadrature, and
:func:`resolvent_closed_form` returns the exact value functions of the four
worked stopping problems (running payoff ``x``; stopped payoff ``x`` for the
standard, reflected and absorbed motions).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .kernels import DomainError, ProcessKind
from .piecewise import PiecewiseFunction
from .quadrature import QuadResult, QuadratureError, gauss_legendre, integrate

__all__ = [
    "ExampleId",
    "ClosedFormValue",
    "QuadratureError",
    "check_alpha",
    "resolvent_numeric",
    "resolvent_closed_form",
    "erf_laplace_identity",
    "erf_laplace_lhs",
    "resolvent_equation_residual",
]

# Inner integrals are truncated at |z| <= _Z_CUT standard deviations.
_Z_CUT = 12.0
_PANELS = 8
_NODES = 16
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


class ExampleId(enum.Enum):
    LINEAR_RUNNING = "running"
    LINEAR_STOPPED = "stopped"
    REFLECTED = "reflected"
    ABSORBED = "absorbed"

    @property
    def kind(self) -> ProcessKind:
        return {
            ExampleId.LINEAR_RUNNING: ProcessKind.STANDARD,
            ExampleId.LINEAR_STOPPED: ProcessKind.STANDARD,
            ExampleId.REFLECTED: ProcessKind.REFLECTED,
            ExampleId.ABSORBED: ProcessKind.ABSORBED,
        }[self]

    @classmethod
    def parse(cls, value) -> "ExampleId":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        for member in cls:
            if text in (member.value, member.name.lower()):
                return member
        raise ValueError(f"unknown example {value!r}; choose from "
                         f"{', '.join(m.value for m in cls)}")


def check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not (alpha > 0 and np.isfinite(alpha)):
        raise DomainError(f"discount rate must be positive, got {alpha!r}")
    return alpha


# ---------------------------------------------------------------------------
# Numerical resolvent


def _inner(kind: ProcessKind, psi: PiecewiseFunction, x: float, s: np.ndarray) -> np.ndarray:
    """``E_x[psi(X_t)]`` (alive part) at ``t = s**2`` for every entry of ``s``."""
    t_gl, w_gl = gauss_legendre(_NODES)
    frac = (np.arange(_PANELS)[:, None] + 0.5 * (t_gl[None, :] + 1.0)).ravel() / _PANELS
    wts = np.tile(w_gl, _PANELS) / (2.0 * _PANELS)
    s = s[:, None]
    total = np.zeros(s.shape[0])
    for sign, weight in kind.images:
        centre = sign * x
        for i in range(psi.n_pieces):
            lo, hi, poly = psi.piece(i)
            lo = max(lo, kind.lower)
            if hi <= lo:
                continue
            z_lo = np.clip((lo - centre) / s, -_Z_CUT, _Z_CUT)
            z_hi = np.clip((hi - centre) / s, -_Z_CUT, _Z_CUT)
            width = z_hi - z_lo
            z = z_lo + width * frac
            y = centre + s * z
            vals = poly(y) * np.exp(-0.5 * z * z)
            total += weight * _INV_SQRT_2PI * width[:, 0] * (vals @ wts)
    return total


def _horizon(alpha: float, psi: PiecewiseFunction, x: float, rtol: float) -> float:
    """Truncation time whose discarded tail is below ``rtol / 100`` (absolute).

    With ``|psi(y)| <= a + b|y|`` and ``E|X_t| <= |x| + sqrt(t)``, the tail
    beyond ``T`` is at most ``exp(-alpha T) (a + b(|x| + sqrt(T) + 1)) / alpha``.
    """
    span = max([1.0, abs(x)] + [abs(bp - x) for bp in psi.breakpoints])
    horizon = max(40.0 / alpha, 40.0 * span**2)
    a, b = psi.linear_envelope()
    while np.exp(-alpha * horizon) * (a + b * (abs(x) + np.sqrt(horizon) + 1.0)) / alpha > rtol / 100:
        horizon *= 1.5
    return horizon


def resolvent_numeric(
    kind: ProcessKind,
    alpha: float,
    psi: PiecewiseFunction,
    x: float,
    tol: float = 1e-8,
    *,
    max_evals: int = 1_000_000,
    full_output: bool = False,
):
    """Evaluate ``R_alpha psi(x)`` by nested quadrature of the transition kernel.

    The time integral is written in ``s = sqrt(t)`` (removing the ``t**-1/2``
    endpoint behaviour) and adaptively integrated up to a horizon whose tail
    is analytically negligible. For each ``s`` the space integral is taken in
    the standardised variable ``z = (y - centre) / s`` of every image
    Gaussian, split at the pieces of ``psi`` and truncated at ``|z| = 12``,
    with composite Gauss-Legendre panels.

    ``tol`` is relative to the integral of the absolute integrand, which
    equals the value itself when ``psi`` has one sign. For the absorbed kind
    the value is that of the killed process (the atom at 0 carries no
    weight), so ``R_alpha 1(x) = (1 - exp(-sqrt(2 alpha) x)) / alpha``.

    Raises
    ------
    QuadratureError
        If ``tol`` is not met within ``max_evals`` integrand evaluations.
    """
    kind = ProcessKind.parse(kind)
    alpha = check_alpha(alpha)
    x = float(x)
    kind.check_states(x)
    if tol <= 0:
        raise ValueError("tol must be positive")
    s_max = np.sqrt(_horizon(alpha, psi, x, tol))

    def integrand(s):
        s = np.maximum(s, 1e-300)
        return 2.0 * s * np.exp(-alpha * s * s) * _inner(kind, psi, x, s)

    kinks = {abs(bp - sign * x) for bp in psi.breakpoints for sign, _ in kind.images}
    if kind is not ProcessKind.STANDARD:
        kinks.add(abs(x))
    scales = {c / np.sqrt(alpha) for c in (0.25, 0.5, 1.0, 2.0, 4.0)}
    points = sorted(p for p in kinks | scales if 0.0 < p < s_max)
    result: QuadResult = integrate(integrand, 0.0, s_max, points=points, rtol=tol,
                                   max_evals=max_evals)
    return result if full_output else result.value


# ---------------------------------------------------------------------------
# Closed forms


@dataclass(frozen=True)
class ClosedFormValue:
    """Value function of a threshold rule in one of the worked examples.

    With ``k = sqrt(2 alpha)``:

    * running payoff ``x``, stop below ``x0 < 0``:
      ``x/alpha - (x0/alpha) exp(-k (x - x0))`` for ``x > x0``, else 0;
    * stopped payoff ``x``, stop above ``x0 > 0``:
      ``x0 exp(-k (x0 - x))`` for ``x < x0``, else ``x``;
    * reflected: ``x0 cosh(k x) / cosh(k x0)`` on ``[0, x0)``, else ``x``;
    * absorbed: ``x0 sinh(k x) / sinh(k x0)`` on ``[0, x0)``, else ``x``
      (just ``x`` when ``x0 = 0``).

    Each branch pair is continuous at ``x0`` for any admissible ``x0``; at the
    optimal threshold it is also C1 there and equals ``R_alpha psi``.
    ``constants`` records ``C1, C2`` of ``C1 exp(k x) + C2 exp(-k x)`` on the
    continuation side.
    """

    example_id: ExampleId
    alpha: float
    x0: float
    constants: dict = field(default_factory=dict, compare=False)

    @property
    def kind(self) -> ProcessKind:
        return self.example_id.kind

    @property
    def rate(self) -> float:
        return float(np.sqrt(2.0 * self.alpha))

    @property
    def knots(self) -> tuple[float, ...]:
        return (self.x0,)

    def in_continuation_branch(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.example_id is ExampleId.LINEAR_RUNNING:
            return x > self.x0
        return x < self.x0

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        self.kind.check_states(x)
        k, x0, a = self.rate, self.x0, self.alpha
        cont = self.in_continuation_branch(x)
        xc = x[cont] if x.ndim else (x if cont else None)
        out = np.array(x, dtype=float, copy=True)
        eid = self.example_id
        if eid is ExampleId.LINEAR_RUNNING:
            out = np.zeros_like(x)
            if xc is not None:
                vals = xc / a - (x0 / a) * np.exp(-k * (xc - x0))
        elif xc is not None:
            if eid is ExampleId.LINEAR_STOPPED:
                vals = x0 * np.exp(-k * (x0 - xc))
            elif eid is ExampleId.REFLECTED:
                vals = x0 * np.cosh(k * xc) / np.cosh(k * x0)
            else:
                vals = x0 * np.sinh(k * xc) / np.sinh(k * x0)
        if xc is not None:
            if x.ndim:
                out[cont] = vals
            else:
                out = np.asarray(vals, dtype=float)
        return out[()] if np.ndim(out) == 0 else out


def _admissible(example_id: ExampleId, x0: float) -> bool:
    if example_id is ExampleId.LINEAR_RUNNING:
        return x0 < 0
    if example_id is ExampleId.ABSORBED:
        return x0 >= 0
    return x0 > 0


def resolvent_closed_form(example_id, alpha: float, x0: float) -> ClosedFormValue:
    """Closed-form value function of ``example_id`` with threshold ``x0``.

    Raises DomainError if ``x0`` is on the wrong side of 0 for the example.
    """
    eid = ExampleId.parse(example_id)
    alpha = check_alpha(alpha)
    x0 = float(x0)
    if not (np.isfinite(x0) and _admissible(eid, x0)):
        raise DomainError(f"threshold {x0!r} not admissible for {eid.value} example")
    k = np.sqrt(2.0 * alpha)
    if eid is ExampleId.LINEAR_RUNNING:
        consts = {"C1": 0.0, "C2": -x0 * np.exp(k * x0) / alpha}
    elif eid is ExampleId.LINEAR_STOPPED:
        consts = {"C1": x0 * np.exp(-k * x0), "C2": 0.0}
    elif eid is ExampleId.REFLECTED:
        c = x0 / (2.0 * np.cosh(k * x0))
        consts = {"C1": c, "C2": c}
    elif x0 > 0:
        c = x0 / (2.0 * np.sinh(k * x0))
        consts = {"C1": c, "C2": -c}
    else:
        consts = {"C1": 0.0, "C2": 0.0}
    return ClosedFormValue(eid, alpha, x0, {key: float(v) for key, v in consts.items()})


# ---------------------------------------------------------------------------
# Laplace transform of the error function


def erf_laplace_identity(alpha: float, q: float) -> float:
    """``int_0^inf (1 - erf(q / (2 sqrt t))) exp(-alpha t) dt = exp(-q sqrt(alpha)) / alpha``."""
    alpha = check_alpha(alpha)
    if q < 0:
        raise DomainError("q must be non-negative")
    return float(np.exp(-q * np.sqrt(alpha)) / alpha)


def erf_laplace_lhs(alpha: float, q: float, rtol: float = 1e-12) -> float:
    """Left-hand side of :func:`erf_laplace_identity` by adaptive quadrature."""
    alpha = check_alpha(alpha)
    if q < 0:
        raise DomainError("q must be non-negative")
    # erfc <= 1, so the tail beyond T is below exp(-alpha T) / alpha
    s_max = np.sqrt(45.0 / alpha)

    def integrand(s):
        s = np.maximum(s, 1e-300)
        return 2.0 * s * erfc(q / (2.0 * s)) * np.exp(-alpha * s * s)

    points = [p for p in (0.5 * q, q, 1.0 / np.sqrt(alpha)) if 0 < p < s_max]
    return integrate(integrand, 0.0, s_max, points=points, rtol=rtol).value


# ---------------------------------------------------------------------------


def resolvent_equation_residual(cf: ClosedFormValue, psi: PiecewiseFunction, x: float,
                                h: float = 1e-3) -> float:
    """``alpha v(x) - v''(x)/2 - psi(x)`` with a central second difference.

    Zero up to ``O(h**2)`` when ``v = R_alpha psi`` is smooth around ``x``.
    Raises DomainError if the stencil would reach a kink (the threshold,
    a breakpoint of ``psi``) or leave the state space.
    """
    x = float(x)
    if h <= 0:
        raise ValueError("h must be positive")
    near = [b for b in (*cf.knots, *psi.breakpoints) if abs(x - b) <= h]
    if near:
        raise DomainError(f"stencil at {x} with step {h} straddles kink(s) {near}")
    if x - h < cf.kind.lower:
        raise DomainError(f"stencil at {x} with step {h} leaves the state space")
    v = cf.evaluate(np.array([x - h, x, x + h]))
    second = (v[2] - 2.0 * v[1] + v[0]) / (h * h)
    return float(cf.alpha * v[1] - 0.5 * second - psi(x))
