"""Per-step reachable-set construction and propagation across time steps.

One step over ``[0, dt]`` splits both the homogeneous and the input-driven
(inhomogeneous) solution into an exactly-computed part and an error part
containing the origin; the error parts are what the tuner measures and
budgets. Propagation multiplies by an interval enclosure of ``exp(A t)``
that is accumulated step by step, so every propagated set and every
reported error stays sound under variable step sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .intervals import IntervalMatrix
from .taylor import (MatrixPowers, curvature_enclosure, input_correction,
                     taylor_partial_sum, truncation_remainder)
from .zonotope import (Zonotope, enclosure_radius, hull_of, interval_map,
                       linear_map, minkowski_sum)


@dataclass(frozen=True)
class LinearSystem:
    """Time-invariant dynamics ``x' = A x + u`` with bounded initial and input sets.

    ``input_set`` is in state space: systems with an input matrix B are
    handled by mapping the raw input set through B beforehand.
    """

    a: np.ndarray
    initial_set: Zonotope
    input_set: Zonotope
    horizon: float

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"system matrix must be square, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("system matrix entries must be finite")
        object.__setattr__(self, "a", a)
        n = a.shape[0]
        if self.initial_set.dim != n:
            raise ValueError(
                f"initial set dimension {self.initial_set.dim} != {n}")
        if self.input_set.dim != n:
            raise ValueError(f"input set dimension {self.input_set.dim} != {n}")
        if not (self.horizon > 0 and np.isfinite(self.horizon)):
            raise ValueError(f"horizon must be positive, got {self.horizon}")

    @property
    def dim(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class StepSets:
    """Local reachable-set pieces for one candidate ``(dt, eta)``.

    ``hom_exact`` carries the step's constant-input drift inside the hull;
    ``inh_exact`` is the full local input solution used for accumulation
    and ``inh_centered`` its drift-free version used in the step window.
    ``hom_error`` and ``inh_error`` both contain the origin, which is what
    makes their enclosure radii sound Hausdorff bounds.
    """

    dt: float
    eta: int
    hom_exact: Zonotope
    hom_error: Zonotope
    inh_exact: Zonotope
    inh_centered: Zonotope
    inh_error: Zonotope
    propagator: np.ndarray
    remainder: IntervalMatrix


@dataclass(frozen=True)
class ExponentialAccumulator:
    """Running interval enclosure of ``exp(A t)`` at the current step start."""

    enclosure: IntervalMatrix
    elapsed: float = 0.0

    @classmethod
    def identity(cls, n: int) -> "ExponentialAccumulator":
        return cls(IntervalMatrix.identity(n), 0.0)

    def advanced(self, propagator: np.ndarray, remainder: IntervalMatrix,
                 dt: float) -> "ExponentialAccumulator":
        """Compose one step: ``phi' = phi @ ([W, W] + E)``, time moves by dt."""
        step = IntervalMatrix.from_point(propagator) + remainder
        return ExponentialAccumulator(self.enclosure @ step, self.elapsed + dt)


def input_propagator(powers: MatrixPowers, dt: float, eta: int) -> np.ndarray:
    """Step integral of the Taylor flow: ``sum_{k=0}^{eta} A^k dt^(k+1)/(k+1)!``."""
    total = np.zeros((powers.dim, powers.dim))
    for k in range(eta + 1):
        total = total + powers.power(k) * (dt ** (k + 1) / math.factorial(k + 1))
    return total


def homogeneous_step(sys: LinearSystem, dt: float, eta: int,
                     powers: MatrixPowers | None = None) -> tuple[Zonotope, Zonotope]:
    """Exact part and error part of the step-window solution without the
    time-varying input.

    Exact: hull of the initial set and its endpoint image, which is the
    Taylor propagator applied to the initial set shifted by the constant
    drift of the input-set center. Keeping the drift endpoint inside the
    hull is what covers intermediate times when the input set is not
    centered at the origin; its interpolation defect is exactly what the
    input-correction term bounds.
    Error: curvature enclosure applied to the initial set plus the input
    correction applied to the input-set center.
    """
    powers = powers if powers is not None else MatrixPowers(sys.a)
    w = taylor_partial_sum(powers, dt, eta)
    drift = input_propagator(powers, dt, eta) @ sys.input_set.center
    endpoint = Zonotope(w @ sys.initial_set.center + drift,
                        w @ sys.initial_set.generators)
    exact = hull_of(sys.initial_set, endpoint)
    curv = curvature_enclosure(powers, dt, eta)
    corr = input_correction(powers, dt, eta)
    error = minkowski_sum(
        interval_map(curv, sys.initial_set),
        interval_map(corr, Zonotope.point(sys.input_set.center)))
    return exact, error


def inhomogeneous_step(sys: LinearSystem, dt: float, eta: int,
                       powers: MatrixPowers | None = None) -> tuple[Zonotope, Zonotope]:
    """Exact part and error part of the local input solution over ``[0, dt]``.

    Exact: ``(sum_{k=0}^{eta} A^k dt^(k+1) / (k+1)!) U``.
    Error: ``(remainder * dt) U``.
    """
    powers = powers if powers is not None else MatrixPowers(sys.a)
    exact = linear_map(input_propagator(powers, dt, eta), sys.input_set)
    rem = truncation_remainder(powers, dt, eta)
    error = interval_map(rem.scale(dt), sys.input_set)
    return exact, error


def build_step_sets(sys: LinearSystem, dt: float, eta: int,
                    powers: MatrixPowers | None = None) -> StepSets:
    """All local pieces for one candidate step, ready for caching."""
    powers = powers if powers is not None else MatrixPowers(sys.a)
    hom_exact, hom_error = homogeneous_step(sys, dt, eta, powers)
    inh_exact, inh_error = inhomogeneous_step(sys, dt, eta, powers)
    # drift-free input solution: the step's constant drift already rides in
    # the homogeneous hull, so the step window only adds the centered part
    inh_centered = Zonotope(np.zeros(sys.dim), inh_exact.generators)
    return StepSets(dt=dt, eta=eta,
                    hom_exact=hom_exact, hom_error=hom_error,
                    inh_exact=inh_exact, inh_centered=inh_centered,
                    inh_error=inh_error,
                    propagator=taylor_partial_sum(powers, dt, eta),
                    remainder=truncation_remainder(powers, dt, eta))


def propagate_step(acc: ExponentialAccumulator, sets: StepSets,
                   p_prev: Zonotope) -> tuple[Zonotope, Zonotope]:
    """Map the local step sets to the current time and extend the input sum.

    Returns the mapped step-window piece (hull, error and drift-free input
    parts; adding the accumulated input set of the step start completes the
    segment) and the accumulated input solution through the step end.
    """
    local = minkowski_sum(minkowski_sum(sets.hom_exact, sets.hom_error),
                          minkowski_sum(sets.inh_centered, sets.inh_error))
    window = interval_map(acc.enclosure, local)
    p_step = interval_map(acc.enclosure,
                          minkowski_sum(sets.inh_exact, sets.inh_error))
    return window, minkowski_sum(p_prev, p_step)


def propagated_error(acc: ExponentialAccumulator, error_set: Zonotope) -> float:
    """Enclosure radius of an error set after mapping it to the current time."""
    return enclosure_radius(interval_map(acc.enclosure, error_set))


def homogeneous_step_error(acc: ExponentialAccumulator, sys: LinearSystem,
                           dt: float, eta: int,
                           powers: MatrixPowers | None = None) -> float:
    """Per-step homogeneous error value; does not depend on previous steps."""
    _, error = homogeneous_step(sys, dt, eta, powers)
    return propagated_error(acc, error)


def input_step_error(acc: ExponentialAccumulator, sys: LinearSystem,
                     dt: float, eta: int,
                     powers: MatrixPowers | None = None) -> float:
    """Per-step input-driven error value; accumulates over the run."""
    _, error = inhomogeneous_step(sys, dt, eta, powers)
    return propagated_error(acc, error)


@dataclass(frozen=True)
class ReachSegment:
    """Reachable set over one time window ``[t_lo, t_hi]``."""

    t_lo: float
    t_hi: float
    set: Zonotope
