"""Counter-based random streams (Philox4x32-10) usable from numba kernels.

Every draw is a pure function of ``(seed, path index, step)``, so a path's
increments do not depend on how many paths are simulated, in which order, or
on how many workers share the job.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

_MASK32 = np.uint64(0xFFFFFFFF)
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_SHIFT = np.uint64(32)
_INV_2_53 = 1.0 / 9007199254740992.0

# Second counter word separates independent draw families for the same step.
TAG_NORMAL = 0
TAG_UNIFORM = 1


@numba.njit(cache=True)
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Philox4x32 with 10 rounds; all words are uint64 holding 32-bit values."""
    for r in range(10):
        if r > 0:
            k0 = (k0 + _W0) & _MASK32
            k1 = (k1 + _W1) & _MASK32
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> _SHIFT
        lo0 = p0 & _MASK32
        hi1 = p1 >> _SHIFT
        lo1 = p1 & _MASK32
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


@numba.njit(cache=True)
def _block(seed, path, block, tag):
    s = np.uint64(seed)
    p = np.uint64(path)
    b = np.uint64(block)
    return philox4x32(
        b & _MASK32,
        (np.uint64(tag) << np.uint64(16)) | (b >> _SHIFT),
        p & _MASK32,
        p >> _SHIFT,
        s & _MASK32,
        s >> _SHIFT,
    )


@numba.njit(cache=True)
def uniform_pair(seed, path, block, tag):
    """Two 53-bit uniforms in the open interval (0, 1)."""
    w0, w1, w2, w3 = _block(seed, path, block, tag)
    a = ((w0 << _SHIFT) | w1) >> np.uint64(11)
    b = ((w2 << _SHIFT) | w3) >> np.uint64(11)
    return (a + 0.5) * _INV_2_53, (b + 0.5) * _INV_2_53


def _ziggurat_tables(n=128, r=3.442619855899, v=9.91256303526217e-3):
    x = np.zeros(n + 1)
    f = np.exp(-0.5 * r * r)
    x[0] = v / f
    x[1] = r
    for i in range(2, n):
        x[i] = np.sqrt(-2.0 * np.log(v / x[i - 1] + f))
        f = np.exp(-0.5 * x[i] ** 2)
    return x, x[1:] / x[:-1]


_ZIG_X, _ZIG_R = _ziggurat_tables()
_ZIG_TAIL = 3.442619855899
TAG_RETRY = 2


@numba.njit(cache=True)
def _to_unit(word):
    return ((word >> np.uint64(11)) + 0.5) * _INV_2_53


@numba.njit(cache=True)
def _ziggurat(word, seed, path, slot):
    """Normal deviate from one 64-bit word (layer index + uniform).

    The ~1.2% of draws that miss the rectangle take extra uniforms from the
    retry family keyed by ``slot``, so the result stays a pure function of
    the counter.
    """
    attempt = 0
    while True:
        i = np.int64(word & np.uint64(0x7F))
        u = 2.0 * _to_unit(word) - 1.0
        if abs(u) < _ZIG_R[i]:
            return u * _ZIG_X[i]
        w0, w1, w2, w3 = _block(seed, path, (slot << 8) | attempt, TAG_RETRY)
        attempt += 1
        if i == 0:
            # Marsaglia's exact tail beyond r
            while True:
                a = np.log(_to_unit((w0 << _SHIFT) | w1)) / _ZIG_TAIL
                b = np.log(_to_unit((w2 << _SHIFT) | w3))
                if -2.0 * b >= a * a:
                    return a - _ZIG_TAIL if u < 0.0 else _ZIG_TAIL - a
                w0, w1, w2, w3 = _block(seed, path, (slot << 8) | attempt, TAG_RETRY)
                attempt += 1
        x = u * _ZIG_X[i]
        f0 = np.exp(-0.5 * (_ZIG_X[i] * _ZIG_X[i] - x * x))
        f1 = np.exp(-0.5 * (_ZIG_X[i + 1] * _ZIG_X[i + 1] - x * x))
        if f1 + _to_unit((w0 << _SHIFT) | w1) * (f0 - f1) < 1.0:
            return x
        word = (w2 << _SHIFT) | w3


@numba.njit(cache=True)
def normal_pair(seed, path, block):
    """Normal deviates ``2*block`` and ``2*block + 1`` of stream ``path``."""
    w0, w1, w2, w3 = _block(seed, path, block, TAG_NORMAL)
    z0 = _ziggurat((w0 << _SHIFT) | w1, seed, path, 2 * block)
    z1 = _ziggurat((w2 << _SHIFT) | w3, seed, path, 2 * block + 1)
    return z0, z1


@numba.njit(cache=True)
def normal_at(seed, path, step):
    """Standard normal number ``step`` of stream ``path``."""
    z0, z1 = normal_pair(seed, path, step >> 1)
    return z0 if (step & 1) == 0 else z1


@numba.njit(cache=True)
def uniform_at(seed, path, step):
    u0, u1 = uniform_pair(seed, path, step >> 1, TAG_UNIFORM)
    return u0 if (step & 1) == 0 else u1


@dataclass(frozen=True)
class PathStream:
    """Handle on the substream of one path: ``(seed, index)``.

    ``seed`` must fit in 64 bits and ``index`` in 64 bits.
    """

    seed: int
    index: int

    def __post_init__(self):
        if not (0 <= self.seed < 2**64) or not (0 <= self.index < 2**64):
            raise ValueError("seed and index must be unsigned 64-bit integers")

    def normals(self, n: int, start: int = 0) -> np.ndarray:
        return _normals(np.uint64(self.seed), np.uint64(self.index), start, n)

    def uniforms(self, n: int, start: int = 0) -> np.ndarray:
        return _uniforms(np.uint64(self.seed), np.uint64(self.index), start, n)


@numba.njit(cache=True)
def _normals(seed, path, start, n):
    out = np.empty(n)
    for i in range(n):
        out[i] = normal_at(seed, path, start + i)
    return out


@numba.njit(cache=True)
def _uniforms(seed, path, start, n):
    out = np.empty(n)
    for i in range(n):
        out[i] = uniform_at(seed, path, start + i)
    return out
