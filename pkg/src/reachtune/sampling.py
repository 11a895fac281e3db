"""Trajectory sampling oracle: random runs of the system, checked per segment.

Initial states are drawn from the initial set (a mix of vertex and interior
coefficient draws), inputs are piecewise-constant samples from the input set
on a uniform grid of 10 switches, and integration is classical fixed-step
RK4 with switch times aligned to step boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import rk4_piecewise
from .reach import LinearSystem, ReachSegment
from .zonotope import Zonotope, _min_inf_norm

INPUT_SWITCHES = 10


@dataclass(frozen=True)
class TrajectoryBatch:
    """Dense states of ``count`` sampled trajectories on a shared time grid."""

    times: np.ndarray          # (k,)
    states: np.ndarray         # (k, count, dim)

    @property
    def count(self) -> int:
        return self.states.shape[1]


def _sample_coefficients(rng, gamma: int, count: int,
                         vertex_fraction: float) -> np.ndarray:
    """(count, gamma) coefficient draws, a mix of vertices and interior."""
    beta = rng.uniform(-1.0, 1.0, size=(count, gamma))
    vertex = rng.random(count) < vertex_fraction
    if gamma and vertex.any():
        signs = rng.choice([-1.0, 1.0], size=(int(vertex.sum()), gamma))
        beta[vertex] = signs
    return beta


def _sample_points(rng, z: Zonotope, count: int,
                   vertex_fraction: float) -> np.ndarray:
    beta = _sample_coefficients(rng, z.num_generators, count, vertex_fraction)
    return z.center[None, :] + beta @ z.generators.T


def sample_trajectories(system: LinearSystem, count: int, seed: int,
                        step: float) -> TrajectoryBatch:
    """Integrate ``count`` random trajectories with RK4 steps of at most ``step``.

    The horizon is split into 10 input pieces; the actual step size divides
    each piece exactly so the input never switches inside an RK4 step.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not (step > 0 and math.isfinite(step)):
        raise ValueError(f"step must be positive, got {step}")
    rng = np.random.default_rng(seed)
    x0 = _sample_points(rng, system.initial_set, count, vertex_fraction=0.5)
    inputs = np.empty((INPUT_SWITCHES, count, system.dim))
    for p in range(INPUT_SWITCHES):
        inputs[p] = _sample_points(rng, system.input_set, count,
                                   vertex_fraction=0.3)
    piece = system.horizon / INPUT_SWITCHES
    steps_per_piece = max(1, math.ceil(piece / step - 1e-12))
    h = piece / steps_per_piece
    states = rk4_piecewise(system.a, x0, inputs, steps_per_piece, h)
    times = np.linspace(0.0, system.horizon, states.shape[0])
    return TrajectoryBatch(times=times, states=states)


def batch_contains(z: Zonotope, points: np.ndarray, tol: float,
                   splitting_rounds: int = 400) -> np.ndarray:
    """Vectorized membership of many points in one zonotope.

    Rejects points outside the (tol-inflated) box hull. For the accept side,
    axis-aligned generators are folded into per-axis slack (their Minkowski
    sum is exactly a box), so a point is in the set iff coefficients for
    the remaining generators leave a residual within that slack. Witness
    coefficients are searched by Douglas-Rachford splitting between the
    bound constraints and the affine consistency set, batched over all
    undecided points; stragglers are settled by an exact linear program.
    Every accept carries an explicit coefficient witness, so no false
    accepts arise.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    r = points - z.center[None, :]
    scale = max(1.0, float(np.abs(z.center).max(initial=0.0)),
                float(np.abs(points).max(initial=0.0)))
    eq_tol = 1e-9 * scale
    m = points.shape[0]
    if z.num_generators == 0:
        return np.all(np.abs(r) <= eq_tol, axis=1)
    out = np.zeros(m, dtype=bool)
    half = np.abs(z.generators).sum(axis=1)
    inside_box = np.all(np.abs(r) <= (1.0 + tol) * half[None, :] + eq_tol, axis=1)
    if not inside_box.any():
        return out
    idx = np.flatnonzero(inside_box)
    work_r = r[idx]

    axis = (np.count_nonzero(z.generators, axis=0) == 1)
    slack = (1.0 + tol) * np.abs(z.generators[:, axis]).sum(axis=1) + eq_tol
    g = z.generators[:, ~axis]
    if g.shape[1] == 0:
        out[idx] = np.all(np.abs(work_r) <= slack[None, :], axis=1)
        return out

    # quick accept from the plain least-squares witness
    beta = np.clip(work_r @ np.linalg.pinv(g).T, -(1.0 + tol), 1.0 + tol)
    residual = beta @ g.T - work_r
    excess = residual - np.clip(residual, -slack, slack)
    feasible = np.max(np.abs(excess), axis=1) <= eq_tol
    out[idx[feasible]] = True
    if feasible.all():
        return out
    idx, work_r, beta = idx[~feasible], work_r[~feasible], beta[~feasible]

    # column-normalized generators keep the splitting well conditioned;
    # the scales move into per-coordinate bounds
    scales = np.linalg.norm(g, axis=0)
    g = g / scales
    bounds = (1.0 + tol) * scales
    n = g.shape[0]
    regularized = np.linalg.inv(g @ g.T + np.eye(n))
    zb = np.clip(beta * scales, -bounds, bounds)
    ze = np.clip(zb @ g.T - work_r, -slack, slack)
    for _ in range(splitting_rounds):
        xb = np.clip(zb, -bounds, bounds)
        xe = np.clip(ze, -slack, slack)
        residual = xb @ g.T - work_r
        excess = residual - np.clip(residual, -slack, slack)
        feasible = np.max(np.abs(excess), axis=1) <= eq_tol
        out[idx[feasible]] = True
        keep = ~feasible
        if not keep.any():
            return out
        if not feasible.all():
            idx, work_r = idx[keep], work_r[keep]
            zb, ze, xb, xe = zb[keep], ze[keep], xb[keep], xe[keep]
        # reflect through the bounds, project onto the affine set, average
        rb, re = 2.0 * xb - zb, 2.0 * xe - ze
        w = (rb @ g.T - re - work_r) @ regularized
        zb = zb + (rb - w @ g) - xb
        ze = ze + (re + w) - xe
    for pos, k in enumerate(idx):
        out[k] = _min_inf_norm(z.generators, work_r[pos], eq_tol) <= 1.0 + tol
    return out


@dataclass(frozen=True)
class ContainmentReport:
    checked: int
    contained: int
    failures: list

    @property
    def all_contained(self) -> bool:
        return self.contained == self.checked


def check_containment(segments: list[ReachSegment], batch: TrajectoryBatch,
                      tol: float = 1e-6, max_failures: int = 10) -> ContainmentReport:
    """Verify that every sampled state lies in the segment covering its time."""
    t_lo = np.array([seg.t_lo for seg in segments])
    seg_idx = np.clip(np.searchsorted(t_lo, batch.times, side="right") - 1,
                      0, len(segments) - 1)
    checked = 0
    contained = 0
    failures = []
    for i, seg in enumerate(segments):
        rows = np.flatnonzero(seg_idx == i)
        if rows.size == 0:
            continue
        pts = batch.states[rows].reshape(-1, batch.states.shape[2])
        ok = batch_contains(seg.set, pts, tol)
        checked += ok.size
        contained += int(ok.sum())
        if not ok.all() and len(failures) < max_failures:
            bad = np.flatnonzero(~ok)
            count = batch.count
            for b in bad[:max_failures - len(failures)]:
                failures.append({
                    "segment": i,
                    "time": float(batch.times[rows[b // count]]),
                    "trajectory": int(b % count),
                })
    return ContainmentReport(checked=checked, contained=contained,
                             failures=failures)
