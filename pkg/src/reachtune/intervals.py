"""Interval vectors and interval matrices with sound (endpoint) arithmetic.

Floating-point rounding is deliberately not tracked outward; all enclosure
guarantees are with respect to real arithmetic on the stored endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import interval_matmul


@dataclass(frozen=True)
class IntervalVector:
    """Axis-aligned box given by componentwise bounds ``lo <= hi``."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float).reshape(-1)
        hi = np.asarray(self.hi, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("interval bounds must have equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("interval bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def radius(self) -> np.ndarray:
        return 0.5 * (self.hi - self.lo)

    def contains(self, x: np.ndarray, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float).reshape(-1)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))


class IntervalMatrix:
    """Matrix whose entries range over closed intervals ``[lo, hi]``."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: np.ndarray, hi: np.ndarray):
        lo = np.atleast_2d(np.asarray(lo, dtype=float))
        hi = np.atleast_2d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape:
            raise ValueError(f"shape mismatch: {lo.shape} vs {hi.shape}")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("interval matrix entries must be finite")
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")
        self.lo = lo
        self.hi = hi

    @classmethod
    def from_point(cls, m: np.ndarray) -> "IntervalMatrix":
        m = np.atleast_2d(np.asarray(m, dtype=float))
        return cls(m, m.copy())

    @classmethod
    def symmetric(cls, halfwidth: np.ndarray) -> "IntervalMatrix":
        """Symmetric interval ``[-H, H]`` from a nonnegative halfwidth matrix."""
        halfwidth = np.atleast_2d(np.asarray(halfwidth, dtype=float))
        if np.any(halfwidth < 0):
            raise ValueError("halfwidth must be nonnegative")
        return cls(-halfwidth, halfwidth.copy())

    @classmethod
    def identity(cls, n: int) -> "IntervalMatrix":
        return cls.from_point(np.eye(n))

    @property
    def shape(self) -> tuple[int, int]:
        return self.lo.shape

    def mid(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def rad(self) -> np.ndarray:
        return 0.5 * (self.hi - self.lo)

    def abs_sup(self) -> np.ndarray:
        """Entrywise ``max(|lo|, |hi|)``, a bound on any contained matrix."""
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def __add__(self, other: "IntervalMatrix") -> "IntervalMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")
        return IntervalMatrix(self.lo + other.lo, self.hi + other.hi)

    def __matmul__(self, other: "IntervalMatrix") -> "IntervalMatrix":
        if self.shape[1] != other.shape[0]:
            raise ValueError(f"shapes not conformable: {self.shape} @ {other.shape}")
        lo, hi = interval_matmul(self.lo, self.hi, other.lo, other.hi)
        return IntervalMatrix(lo, hi)

    def scale(self, factor: float) -> "IntervalMatrix":
        """Multiply by a nonnegative scalar."""
        if factor < 0:
            raise ValueError("scale factor must be nonnegative")
        return IntervalMatrix(self.lo * factor, self.hi * factor)

    def contains(self, m: np.ndarray, tol: float = 0.0) -> bool:
        m = np.atleast_2d(np.asarray(m, dtype=float))
        return bool(np.all(m >= self.lo - tol) and np.all(m <= self.hi + tol))

    def __repr__(self) -> str:
        return f"IntervalMatrix(shape={self.shape})"


def scaled_interval_times_matrix(coeff_lo: float, coeff_hi: float,
                                 point: np.ndarray) -> IntervalMatrix:
    """Enclosure of ``{s * P : s in [coeff_lo, coeff_hi]}`` for a point matrix P.

    P may have mixed signs, so each entry gets ``[min(lo*p, hi*p), max(lo*p, hi*p)]``.
    """
    point = np.atleast_2d(np.asarray(point, dtype=float))
    a = coeff_lo * point
    b = coeff_hi * point
    return IntervalMatrix(np.minimum(a, b), np.maximum(a, b))


def im_add(m1: IntervalMatrix, m2: IntervalMatrix) -> IntervalMatrix:
    """Minkowski sum of two interval matrices (entrywise endpoint sums)."""
    return m1 + m2


def im_mul(m1: IntervalMatrix, m2: IntervalMatrix) -> IntervalMatrix:
    """Product enclosure containing ``{X @ Y : X in m1, Y in m2}``."""
    return m1 @ m2
