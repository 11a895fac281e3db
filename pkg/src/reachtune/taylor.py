"""Truncated Taylor expansion of the matrix exponential with certified bounds.

Provides the point partial sum, a symmetric interval enclosure of the
truncation remainder, the curvature enclosure covering all intermediate
times of a step, the matching input correction term, and the automatic
cut-off order for the series.
"""

from __future__ import annotations

import math

import numpy as np

from .intervals import IntervalMatrix, scaled_interval_times_matrix


class NotConvergentError(ArithmeticError):
    """Remainder bound diverges: ``|A|*dt / (eta+2) >= 1``.

    Callers recover by raising the order or shrinking the time step.
    """


class MatrixPowers:
    """Per-matrix cache of ``A**k`` and ``|A|**k``, grown on demand.

    Confined to one analysis run; not safe for concurrent mutation.
    """

    def __init__(self, a: np.ndarray):
        a = np.atleast_2d(np.asarray(a, dtype=float))
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"matrix must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        self.a = a
        self.dim = a.shape[0]
        self.norm_inf = float(np.max(np.abs(a).sum(axis=1))) if a.size else 0.0
        self._pow = [np.eye(self.dim), a]
        self._abs_pow = [np.eye(self.dim), np.abs(a)]

    def power(self, k: int) -> np.ndarray:
        while len(self._pow) <= k:
            self._pow.append(self._pow[-1] @ self.a)
        return self._pow[k]

    def abs_power(self, k: int) -> np.ndarray:
        while len(self._abs_pow) <= k:
            self._abs_pow.append(self._abs_pow[-1] @ self._abs_pow[1])
        return self._abs_pow[k]


def _as_powers(a) -> MatrixPowers:
    return a if isinstance(a, MatrixPowers) else MatrixPowers(a)


def _check_step(dt: float, eta: int) -> None:
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError(f"time step must be positive and finite, got {dt}")
    if eta < 1:
        raise ValueError(f"Taylor order must be >= 1, got {eta}")


def _dt_pow_over_factorial(dt: float, k: int) -> float:
    if k <= 150:
        return dt ** k / math.factorial(k)
    return math.exp(k * math.log(dt) - math.lgamma(k + 1))


def taylor_partial_sum(a, dt: float, eta: int) -> np.ndarray:
    """Point matrix ``sum_{k=0}^{eta} (A dt)^k / k!`` (identity term included)."""
    powers = _as_powers(a)
    _check_step(dt, eta)
    total = np.eye(powers.dim)
    for k in range(1, eta + 1):
        total = total + powers.power(k) * _dt_pow_over_factorial(dt, k)
    return total


def convergence_ratio(a, dt: float, eta: int) -> float:
    """Geometric ratio of the remainder tail; must be < 1 for the bound."""
    powers = _as_powers(a)
    return powers.norm_inf * dt / (eta + 2)


def truncation_remainder(a, dt: float, eta: int) -> IntervalMatrix:
    """Symmetric interval enclosing the Taylor remainder after ``eta`` terms.

    The halfwidth is the geometric-tail closed form
    ``(|A| dt)^(eta+1) / (eta+1)! * 1 / (1 - zeta)`` with
    ``zeta = ||A||_inf dt / (eta+2)``.

    Raises NotConvergentError when ``zeta >= 1``.
    """
    powers = _as_powers(a)
    _check_step(dt, eta)
    zeta = convergence_ratio(powers, dt, eta)
    if zeta >= 1.0:
        raise NotConvergentError(
            f"remainder tail ratio {zeta:.3g} >= 1 at dt={dt:.3g}, eta={eta}")
    halfwidth = powers.abs_power(eta + 1) * (
        _dt_pow_over_factorial(dt, eta + 1) / (1.0 - zeta))
    return IntervalMatrix.symmetric(halfwidth)


_MIX_COEFF: dict[int, float] = {}


def _mix_coefficient(k: int) -> float:
    # k**(-k/(k-1)) - k**(-1/(k-1)), the (negative) spread of t^k/k!-type
    # terms over a step relative to its endpoints; k >= 2.
    c = _MIX_COEFF.get(k)
    if c is None:
        c = k ** (-k / (k - 1.0)) - k ** (-1.0 / (k - 1.0))
        _MIX_COEFF[k] = c
    return c


def curvature_enclosure(a, dt: float, eta: int) -> IntervalMatrix:
    """Interval matrix covering all in-step times of the homogeneous flow.

    ``sum_{k=2}^{eta} [c_k dt^k, 0] A^k / k!  +  remainder`` with
    ``c_k = k^(-k/(k-1)) - k^(-1/(k-1)) < 0``.
    """
    powers = _as_powers(a)
    _check_step(dt, eta)
    total = truncation_remainder(powers, dt, eta)
    for k in range(2, eta + 1):
        coeff = _mix_coefficient(k) * dt ** k
        term = scaled_interval_times_matrix(
            coeff, 0.0, powers.power(k) / math.factorial(k))
        total = total + term
    return total


def input_correction(a, dt: float, eta: int) -> IntervalMatrix:
    """Interval matrix mapping a constant input center over one step.

    ``sum_{k=2}^{eta+1} [c_k dt^k, 0] A^(k-1) / k!  +  remainder * dt``.
    """
    powers = _as_powers(a)
    _check_step(dt, eta)
    total = truncation_remainder(powers, dt, eta).scale(dt)
    for k in range(2, eta + 2):
        coeff = _mix_coefficient(k) * dt ** k
        term = scaled_interval_times_matrix(
            coeff, 0.0, powers.power(k - 1) / math.factorial(k))
        total = total + term
    return total


MAX_ORDER_CAP = 100
MAX_ORDER_REL_FLOOR = 1e-12


def max_taylor_order(a, dt: float, rel_floor: float = MAX_ORDER_REL_FLOOR,
                     cap: int = MAX_ORDER_CAP) -> int:
    """Smallest useful series cut-off for the given matrix and step.

    Returns the smallest ``eta`` whose remainder tail ratio is < 1 and whose
    scalar tail bound ``(||A||dt)^(eta+1)/(eta+1)!/(1-zeta)`` drops below
    ``rel_floor`` relative to the partial sum's inf-norm, capped at ``cap``.
    """
    powers = _as_powers(a)
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError(f"time step must be positive and finite, got {dt}")
    alpha = powers.norm_inf * dt
    log_alpha = math.log(alpha) if alpha > 0 else -math.inf
    partial = np.eye(powers.dim)
    with np.errstate(over="ignore", invalid="ignore"):
        for eta in range(1, cap + 1):
            partial = partial + powers.power(eta) * _dt_pow_over_factorial(dt, eta)
            zeta = alpha / (eta + 2)
            if zeta >= 1.0:
                continue
            log_tail = ((eta + 1) * log_alpha - math.lgamma(eta + 2)
                        - math.log1p(-zeta))
            norm_partial = float(np.max(np.abs(partial).sum(axis=1)))
            if not math.isfinite(norm_partial):
                norm_partial = math.inf
            if norm_partial == 0.0:
                # relative floor of an exactly cancelled sum: only a zero
                # tail can pass
                if log_tail == -math.inf:
                    return eta
                continue
            if log_tail <= math.log(rel_floor) + math.log(norm_partial):
                return eta
    return cap
