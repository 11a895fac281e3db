"""Zonotopes: the single set representation used throughout the engine.

A zonotope is ``{c + G @ beta : ||beta||_inf <= 1}`` with center ``c`` and
generator matrix ``G`` (one generator per column). All operations are pure;
zero generator columns are dropped eagerly since they inflate the order
without changing the set.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .intervals import IntervalMatrix, IntervalVector


class Zonotope:
    __slots__ = ("center", "generators")

    def __init__(self, center: np.ndarray, generators: np.ndarray | None = None):
        center = np.asarray(center, dtype=float).reshape(-1)
        n = center.shape[0]
        if generators is None:
            generators = np.zeros((n, 0))
        else:
            generators = np.asarray(generators, dtype=float)
            if generators.ndim == 1:
                generators = generators.reshape(n, -1)
        if generators.shape[0] != n:
            raise ValueError(
                f"generator rows {generators.shape[0]} != dimension {n}")
        if not (np.all(np.isfinite(center)) and np.all(np.isfinite(generators))):
            raise ValueError("zonotope data must be finite")
        if generators.shape[1]:
            nonzero = np.any(generators != 0.0, axis=0)
            if not nonzero.all():
                generators = generators[:, nonzero]
        self.center = center
        # fixed memory order keeps reductions deterministic across sources
        self.generators = np.ascontiguousarray(generators)

    @classmethod
    def point(cls, center: np.ndarray) -> "Zonotope":
        return cls(center)

    @classmethod
    def box(cls, center: np.ndarray, halfwidths: np.ndarray) -> "Zonotope":
        """Axis-aligned box as a zonotope with diagonal generators."""
        halfwidths = np.asarray(halfwidths, dtype=float).reshape(-1)
        if np.any(halfwidths < 0):
            raise ValueError("halfwidths must be nonnegative")
        return cls(center, np.diag(halfwidths))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def num_generators(self) -> int:
        return self.generators.shape[1]

    @property
    def order(self) -> float:
        return self.num_generators / self.dim

    def __add__(self, other: "Zonotope") -> "Zonotope":
        return minkowski_sum(self, other)

    def __repr__(self) -> str:
        return f"Zonotope(dim={self.dim}, generators={self.num_generators})"


def minkowski_sum(z1: Zonotope, z2: Zonotope) -> Zonotope:
    """Exact Minkowski sum: centers add, generator columns concatenate."""
    if z1.dim != z2.dim:
        raise ValueError(f"dimension mismatch: {z1.dim} vs {z2.dim}")
    return Zonotope(z1.center + z2.center,
                    np.hstack((z1.generators, z2.generators)))


def linear_map(m: np.ndarray, z: Zonotope) -> Zonotope:
    """Exact image ``{M x : x in Z}`` under a point matrix."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.shape[1] != z.dim:
        raise ValueError(f"matrix columns {m.shape[1]} != dimension {z.dim}")
    return Zonotope(m @ z.center, m @ z.generators)


def interval_map(m: IntervalMatrix, z: Zonotope) -> Zonotope:
    """Enclosure of ``{M x : M in m, x in Z}`` via the center-radius split.

    Maps by the midpoint matrix and adds an axis-aligned box whose
    halfwidths are ``rad(m) @ (|c| + sum_j |g_j|)``.
    """
    if m.shape[1] != z.dim:
        raise ValueError(f"matrix columns {m.shape[1]} != dimension {z.dim}")
    mid = m.mid()
    mapped = Zonotope(mid @ z.center, mid @ z.generators)
    rad = m.rad()
    if not rad.any():
        return mapped
    reach_bound = np.abs(z.center) + np.abs(z.generators).sum(axis=1)
    halfwidths = rad @ reach_bound
    return minkowski_sum(mapped, Zonotope.box(np.zeros(m.shape[0]), halfwidths))


def hull_of(z1: Zonotope, z2: Zonotope) -> Zonotope:
    """Zonotope enclosure of the convex hull of two zonotopes.

    In one dimension the hull of two intervals is an interval, so it is
    returned exactly. Otherwise generators are paired by column index (the
    shorter matrix is padded with zeros): center ``(c1 + c2)/2``,
    generators ``(g1 + g2)/2`` and ``(g1 - g2)/2`` per pair plus the
    column ``(c1 - c2)/2``.
    """
    if z1.dim != z2.dim:
        raise ValueError(f"dimension mismatch: {z1.dim} vs {z2.dim}")
    if z1.dim == 1:
        h1, h2 = interval_hull(z1), interval_hull(z2)
        lo = min(h1.lo[0], h2.lo[0])
        hi = max(h1.hi[0], h2.hi[0])
        return Zonotope([0.5 * (lo + hi)], [[0.5 * (hi - lo)]])
    g1, g2 = z1.generators, z2.generators
    width = max(g1.shape[1], g2.shape[1])
    if g1.shape[1] < width:
        g1 = np.hstack((g1, np.zeros((z1.dim, width - g1.shape[1]))))
    if g2.shape[1] < width:
        g2 = np.hstack((g2, np.zeros((z2.dim, width - g2.shape[1]))))
    diff = 0.5 * (z1.center - z2.center)
    gens = np.hstack((0.5 * (g1 + g2), 0.5 * (g1 - g2), diff[:, None]))
    return Zonotope(0.5 * (z1.center + z2.center), gens)


def hull_step(z: Zonotope, w: np.ndarray) -> Zonotope:
    """Zonotope enclosure of the convex hull of ``Z`` and ``W @ Z``."""
    w = np.atleast_2d(np.asarray(w, dtype=float))
    if w.shape != (z.dim, z.dim):
        raise ValueError(f"expected {z.dim}x{z.dim} matrix, got {w.shape}")
    return hull_of(z, linear_map(w, z))


def interval_hull(z: Zonotope) -> IntervalVector:
    """Tightest axis-aligned box: ``c_i +- sum_j |G[i, j]|``."""
    half = np.abs(z.generators).sum(axis=1)
    return IntervalVector(z.center - half, z.center + half)


def enclosure_radius(z: Zonotope) -> float:
    """Radius of the smallest origin-centered hypersphere around the box hull.

    Over-approximates the Hausdorff distance ``d_H(S, S + Z)`` for any set S
    whenever ``0 in Z``.
    """
    hull = interval_hull(z)
    return float(np.linalg.norm(np.maximum(np.abs(hull.lo), np.abs(hull.hi))))


def support(z: Zonotope, direction: np.ndarray) -> float:
    """Support value ``max {d . x : x in Z} = d.c + sum_j |d.g_j|``."""
    direction = np.asarray(direction, dtype=float).reshape(-1)
    if direction.shape[0] != z.dim:
        raise ValueError(f"direction length {direction.shape[0]} != {z.dim}")
    return float(direction @ z.center + np.abs(direction @ z.generators).sum())


def reduce_order(z: Zonotope, target_order: float) -> tuple[Zonotope, float]:
    """Cap the zonotope order, returning the superset and a certified error.

    Generators with the smallest ``||g||_1 - ||g||_inf`` score (ties broken by
    column index) are replaced by their box enclosure so that at most
    ``floor(dim * target_order)`` generators remain. The certified error is
    the enclosure radius of the box of the removed generators that are not
    axis-aligned: absorbing axis-aligned generators into the box is exact,
    so only the rest widens the set.
    """
    if target_order < 1:
        raise ValueError(f"target order must be >= 1, got {target_order}")
    n = z.dim
    max_gens = int(np.floor(n * target_order + 1e-12))
    gamma = z.num_generators
    if gamma <= max_gens:
        return z, 0.0
    keep = max_gens - n
    g = z.generators
    score = np.abs(g).sum(axis=0) - np.abs(g).max(axis=0)
    order_idx = np.argsort(score, kind="stable")
    removed = g[:, np.sort(order_idx[:gamma - keep])]
    kept = g[:, np.sort(order_idx[gamma - keep:])]
    box_half = np.abs(removed).sum(axis=1)
    reduced = Zonotope(z.center, np.hstack((kept, np.diag(box_half))))
    widening = removed[:, np.count_nonzero(removed, axis=0) > 1]
    return reduced, float(np.linalg.norm(np.abs(widening).sum(axis=1)))


def contains_point(z: Zonotope, x: np.ndarray, tol: float = 0.0) -> bool:
    """Exact membership test: is there ``beta`` with ``||beta||_inf <= 1+tol``
    and ``c + G beta = x``?

    Decides via a cheap necessary box check and a sufficient least-squares
    check, falling back to a linear program for the undecided cases.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != z.dim:
        raise ValueError(f"point length {x.shape[0]} != {z.dim}")
    r = x - z.center
    scale = max(1.0, float(np.abs(z.center).max(initial=0.0)),
                float(np.abs(x).max(initial=0.0)))
    eq_tol = 1e-9 * scale
    if z.num_generators == 0:
        return bool(np.all(np.abs(r) <= eq_tol))
    half = np.abs(z.generators).sum(axis=1)
    if np.any(np.abs(r) > (1.0 + tol) * half + eq_tol):
        return False
    beta, residual = _least_squares_coefficients(z.generators, r)
    if residual <= eq_tol and np.max(np.abs(beta)) <= 1.0 + tol:
        return True
    return _min_inf_norm(z.generators, r, eq_tol) <= 1.0 + tol


def _least_squares_coefficients(g: np.ndarray, r: np.ndarray):
    beta, *_ = np.linalg.lstsq(g, r, rcond=None)
    residual = float(np.max(np.abs(g @ beta - r)))
    return beta, residual


def _min_inf_norm(g: np.ndarray, r: np.ndarray, eq_tol: float) -> float:
    # LP over (beta, s): minimize s subject to G beta = r, |beta_j| <= s.
    n, gamma = g.shape
    c = np.zeros(gamma + 1)
    c[-1] = 1.0
    a_eq = np.hstack((g, np.zeros((n, 1))))
    ones = np.ones((gamma, 1))
    a_ub = np.block([[np.eye(gamma), -ones], [-np.eye(gamma), -ones]])
    b_ub = np.zeros(2 * gamma)
    bounds = [(None, None)] * gamma + [(0, None)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=r,
                  bounds=bounds, method="highs")
    if not res.success:
        # Equalities infeasible: the point is off the generator span.
        return np.inf
    beta = res.x[:gamma]
    if np.max(np.abs(g @ beta - r)) > max(eq_tol, 1e-9):
        return np.inf
    return float(res.fun)
