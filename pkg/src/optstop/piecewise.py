"""Piecewise-polynomial functions of the state (payoffs and resolvent sources)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PiecewiseFunction:
    """Piecewise polynomial on the real line.

    ``breakpoints`` ``b_1 < ... < b_{n-1}`` cut the line into ``n`` pieces and
    ``coeffs[i]`` holds the ascending-power coefficients used on piece ``i``.
    Pieces are ``[b_i, b_{i+1})`` (right-continuous) unless ``left_closed`` is
    False, in which case they are ``(b_i, b_{i+1}]``.

    Examples
    --------
    >>> step = PiecewiseFunction((1.0,), ((0.0,), (0.0, 0.5)))  # 0.5 x 1{x >= 1}
    >>> float(step(2.0))
    1.0
    """

    breakpoints: tuple[float, ...]
    coeffs: tuple[tuple[float, ...], ...]
    left_closed: bool = True

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        cf = tuple(tuple(float(c) for c in poly) or (0.0,) for poly in self.coeffs)
        if len(cf) != len(bp) + 1:
            raise ValueError("need exactly one polynomial per piece")
        if any(not np.isfinite(b) for b in bp) or any(b1 >= b2 for b1, b2 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be finite and strictly increasing")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "coeffs", cf)

    @classmethod
    def constant(cls, c: float) -> "PiecewiseFunction":
        return cls((), ((c,),))

    @classmethod
    def linear(cls, slope: float, intercept: float = 0.0) -> "PiecewiseFunction":
        return cls((), ((intercept, slope),))

    @classmethod
    def linear_above(cls, x0: float, slope: float, *, include_x0: bool = True) -> "PiecewiseFunction":
        """``slope * x`` above ``x0`` and zero below it."""
        return cls((x0,), ((0.0,), (0.0, slope)), left_closed=include_x0)

    @property
    def n_pieces(self) -> int:
        return len(self.coeffs)

    def piece_index(self, x) -> np.ndarray:
        side = "right" if self.left_closed else "left"
        return np.searchsorted(np.asarray(self.breakpoints), x, side=side)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.n_pieces == 1:
            out = np.polynomial.polynomial.polyval(x, self.coeffs[0]) * np.ones_like(x)
        else:
            idx = self.piece_index(x)
            out = np.zeros_like(x)
            for i, poly in enumerate(self.coeffs):
                mask = idx == i
                if np.any(mask):
                    out[mask] = np.polynomial.polynomial.polyval(x[mask], poly)
        return out[()] if out.ndim == 0 else out

    def piece(self, i: int):
        """Return ``(lo, hi, poly)`` for piece ``i``; ``poly`` is vectorised."""
        lo = -np.inf if i == 0 else self.breakpoints[i - 1]
        hi = np.inf if i == self.n_pieces - 1 else self.breakpoints[i]
        poly = self.coeffs[i]
        return lo, hi, lambda y: np.polynomial.polynomial.polyval(y, poly)

    def is_zero(self) -> bool:
        return all(all(c == 0.0 for c in poly) for poly in self.coeffs)

    @property
    def degree(self) -> int:
        return max(len(poly) - 1 for poly in self.coeffs)

    def linear_envelope(self) -> tuple[float, float]:
        """Constants ``(a, b)`` with ``|f(x)| <= a + b|x|`` everywhere.

        Raises ValueError for pieces of degree above one.
        """
        if self.degree > 1:
            raise ValueError("linear envelope needs pieces of degree <= 1")
        a = max(abs(poly[0]) for poly in self.coeffs)
        b = max((abs(poly[1]) if len(poly) > 1 else 0.0) for poly in self.coeffs)
        return a, b

    def padded_coeffs(self) -> np.ndarray:
        """Coefficients as a rectangular ``(n_pieces, degree + 1)`` array."""
        out = np.zeros((self.n_pieces, self.degree + 1))
        for i, poly in enumerate(self.coeffs):
            out[i, : len(poly)] = poly
        return out

    def _merged(self, other: "PiecewiseFunction", a: float, b: float) -> "PiecewiseFunction":
        if self.left_closed != other.left_closed and self.breakpoints and other.breakpoints:
            raise ValueError("cannot combine pieces with different closure conventions")
        closed = self.left_closed if self.breakpoints else other.left_closed
        bps = sorted(set(self.breakpoints) | set(other.breakpoints))
        edges = [-np.inf, *bps, np.inf]
        polys = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            mid = _interior_point(lo, hi)
            p1 = self.coeffs[int(self.piece_index(mid))]
            p2 = other.coeffs[int(other.piece_index(mid))]
            n = max(len(p1), len(p2))
            polys.append(tuple(
                a * (p1[k] if k < len(p1) else 0.0) + b * (p2[k] if k < len(p2) else 0.0)
                for k in range(n)
            ))
        return PiecewiseFunction(tuple(bps), tuple(polys), left_closed=closed)

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = PiecewiseFunction.constant(float(other))
        if not isinstance(other, PiecewiseFunction):
            return NotImplemented
        return self._merged(other, 1.0, 1.0)

    __radd__ = __add__

    def __mul__(self, c):
        if not isinstance(c, (int, float)):
            return NotImplemented
        return PiecewiseFunction(
            self.breakpoints,
            tuple(tuple(c * v for v in poly) for poly in self.coeffs),
            self.left_closed,
        )

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-1.0) * other


def _interior_point(lo: float, hi: float) -> float:
    if np.isinf(lo) and np.isinf(hi):
        return 0.0
    if np.isinf(lo):
        return hi - 1.0
    if np.isinf(hi):
        return lo + 1.0
    return 0.5 * (lo + hi)

