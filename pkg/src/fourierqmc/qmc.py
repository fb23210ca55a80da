"""Sobol low-discrepancy points, digital-shift randomization, and the RQMC
mean/error estimator.

Coordinates carry 52 significant bits. Point n is the XOR of the direction
integers selected by the set bits of gray(n); a digital shift XORs one
uniform 52-bit mask per (seed, shift, dimension) into every coordinate. The
generation kernel is compiled when the extension built, with a bit-identical
NumPy fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

try:
    from . import _sobolkernel as _kernel
    BACKEND = "compiled"
except ImportError:
    from . import _sobolnp as _kernel
    BACKEND = "numpy"

from . import _sobolnp

DEFAULT_SEED = 20140
MAX_DIM = 64
_NBITS = 52


class DimensionUnsupported(ValueError):
    """Requested dimension exceeds the bundled direction-number table."""


class NonFiniteIntegrand(ArithmeticError):
    """The integrand returned a non-finite value inside the unit cube."""


_TABLE: np.ndarray | None = None


def _build_table() -> np.ndarray:
    table = np.zeros((MAX_DIM, _NBITS), dtype=np.uint64)
    for b in range(_NBITS):
        table[0, b] = np.uint64(1) << np.uint64(_NBITS - 1 - b)
    text = resources.files("fourierqmc").joinpath(
        "data/sobol_directions.txt").read_text()
    dim = 1
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [int(tok) for tok in line.split()]
        s, a, m = parts[0], parts[1], parts[2:]
        if len(m) != s:
            raise ValueError("malformed direction-number line")
        V = [0] * (_NBITS + 1)
        for i in range(1, min(s, _NBITS) + 1):
            V[i] = m[i - 1] << (_NBITS - i)
        for i in range(s + 1, _NBITS + 1):
            V[i] = V[i - s] ^ (V[i - s] >> s)
            for k in range(1, s):
                V[i] ^= ((a >> (s - 1 - k)) & 1) * V[i - k]
        table[dim] = V[1:]
        dim += 1
        if dim == MAX_DIM:
            break
    if dim != MAX_DIM:
        raise ValueError("direction-number table shorter than expected")
    return table


def _direction_table(d: int) -> np.ndarray:
    global _TABLE
    if not isinstance(d, (int, np.integer)) or not 1 <= d <= MAX_DIM:
        raise DimensionUnsupported(
            f"dimension {d} outside 1..{MAX_DIM} (extend the direction table)")
    if _TABLE is None:
        _TABLE = _build_table()
    return _TABLE[:d]


def _fill(d: int, n: int, n0: int, shift: np.ndarray | None) -> np.ndarray:
    dirs = _direction_table(d)
    if shift is None:
        shift = np.zeros(d, dtype=np.uint64)
    out = np.empty((n, d), dtype=np.float64)
    _kernel.sobol_fill(dirs, shift, n0, out)
    return out


@dataclass
class SobolStream:
    """Deterministic Sobol point source that can resume mid-sequence."""

    d: int
    index: int = 0

    def __post_init__(self):
        _direction_table(self.d)  # validate d eagerly

    def take(self, n: int) -> np.ndarray:
        if n < 1:
            raise ValueError("need n >= 1")
        pts = _fill(self.d, n, self.index, None)
        self.index += n
        return pts


def sobol_points(d: int, N: int) -> np.ndarray:
    """First N unshifted Sobol points in [0,1)^d."""
    if N < 1:
        raise ValueError("need N >= 1")
    return _fill(d, N, 0, None)


def _shift_masks(seed: int, s: int, d: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(key=[seed, s]))
    draws = rng.integers(0, 2 ** 64, size=d, dtype=np.uint64)
    return draws >> np.uint64(12)  # keep the top 52 bits


def digital_shift(points: np.ndarray, seed: int, s: int) -> np.ndarray:
    """XOR one uniform 52-bit mask per dimension into every coordinate."""
    pts = np.asarray(points, dtype=float)
    ints = (pts * 2.0 ** _NBITS).astype(np.uint64)
    mask = _shift_masks(seed, s, pts.shape[1])
    return (ints ^ mask) * 2.0 ** -_NBITS


@dataclass(frozen=True)
class RQMCEstimate:
    value: float
    stderr: float
    c_alpha: float
    N: int
    S: int
    seed: int

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")


def rqmc_estimate(f, d: int, N: int, S: int = 30, seed: int = DEFAULT_SEED,
                  c_alpha: float = 1.96) -> RQMCEstimate:
    """Mean of f over the unit cube with a shift-to-shift error bar.

    value = (1/S) sum_s (1/N) sum_n f(u_n^(s)); stderr scales the sample
    standard deviation of the S per-shift means by c_alpha / sqrt(S).
    """
    if N < 1:
        raise ValueError("need N >= 1")
    if S < 2:
        raise ValueError("need S >= 2 shifts for an error estimate")
    means = np.empty(S)
    for s in range(S):
        u = _fill(d, N, 0, _shift_masks(seed, s, d))
        vals = np.asarray(f(u), dtype=float).reshape(N)
        if not np.all(np.isfinite(vals)):
            i = int(np.flatnonzero(~np.isfinite(vals))[0])
            raise NonFiniteIntegrand(
                f"non-finite integrand value at shift {s}, u={u[i].tolist()}")
        means[s] = vals.mean()
    value = float(means.mean())
    stderr = float(c_alpha * means.std(ddof=1) / math.sqrt(S))
    return RQMCEstimate(value=value, stderr=stderr, c_alpha=c_alpha,
                        N=N, S=S, seed=seed)
