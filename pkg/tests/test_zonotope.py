import math

import numpy as np
import pytest

from reachtune.intervals import IntervalMatrix
from reachtune.zonotope import (Zonotope, contains_point, enclosure_radius,
                                hull_step, interval_hull, interval_map,
                                linear_map, minkowski_sum, reduce_order,
                                support)


def random_zonotope(rng, n, gens, scale=1.0, contains_origin=False):
    g = rng.uniform(-scale, scale, size=(n, gens))
    if contains_origin:
        beta = rng.uniform(-0.9, 0.9, size=gens)
        center = -g @ beta
    else:
        center = rng.uniform(-scale, scale, size=n)
    return Zonotope(center, g)


def unit_directions(n, count=360):
    rng = np.random.default_rng(123)
    if n == 2:
        angles = np.linspace(0, 2 * math.pi, count, endpoint=False)
        return np.column_stack((np.cos(angles), np.sin(angles)))
    d = rng.normal(size=(count, n))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def directional_hausdorff(larger, smaller, dirs):
    # for nested convex sets: sup over directions of the support gap
    return max(support(larger, d) - support(smaller, d) for d in dirs)


def test_zonotope_drops_zero_generators():
    z = Zonotope([0.0, 0.0], np.array([[1.0, 0.0, 0.5], [0.0, 0.0, 0.5]]))
    assert z.num_generators == 2
    assert z.order == 1.0
    assert Zonotope.point([1.0, 2.0]).num_generators == 0


def test_zonotope_validation():
    with pytest.raises(ValueError):
        Zonotope([0.0], np.ones((2, 1)))
    with pytest.raises(ValueError):
        Zonotope([np.inf], np.ones((1, 1)))


def test_minkowski_sum_identity_point():
    z = Zonotope([1.0, -1.0], np.array([[1.0, 0.0], [0.5, 2.0]]))
    total = minkowski_sum(z, Zonotope.point([0.0, 0.0]))
    np.testing.assert_array_equal(total.center, z.center)
    np.testing.assert_array_equal(total.generators, z.generators)


def test_minkowski_sum_unit_boxes():
    box = Zonotope([0.0, 0.0], np.eye(2))
    total = minkowski_sum(box, box)
    hull = interval_hull(total)
    np.testing.assert_array_equal(hull.lo, [-2.0, -2.0])
    np.testing.assert_array_equal(hull.hi, [2.0, 2.0])


def test_minkowski_sum_concatenates():
    z1 = Zonotope([1.0, 1.0], np.eye(2))
    z2 = Zonotope([-1.0, 0.0], np.array([[0.5], [0.0]]))
    total = minkowski_sum(z1, z2)
    np.testing.assert_array_equal(total.center, [0.0, 1.0])
    assert total.num_generators == 3
    with pytest.raises(ValueError):
        minkowski_sum(z1, Zonotope.point([0.0]))


def test_support_additive_under_minkowski_sum():
    rng = np.random.default_rng(2)
    for _ in range(20):
        z1 = random_zonotope(rng, 3, 4)
        z2 = random_zonotope(rng, 3, 2)
        d = rng.normal(size=3)
        total = support(minkowski_sum(z1, z2), d)
        assert total == pytest.approx(support(z1, d) + support(z2, d), rel=1e-12)


def test_linear_map_identity_zero_diag():
    z = Zonotope([1.0, 1.0], np.eye(2))
    same = linear_map(np.eye(2), z)
    np.testing.assert_array_equal(interval_hull(same).lo, interval_hull(z).lo)
    zero = linear_map(np.zeros((2, 2)), z)
    assert zero.num_generators == 0
    np.testing.assert_array_equal(zero.center, [0.0, 0.0])
    scaled = linear_map(np.diag([2.0, 3.0]), z)
    np.testing.assert_array_equal(scaled.center, [2.0, 3.0])
    np.testing.assert_array_equal(scaled.generators, np.diag([2.0, 3.0]))


def test_interval_map_point_interval_is_linear_map():
    z = Zonotope([1.0, 2.0], np.array([[1.0, 0.0], [0.0, 0.5]]))
    m = np.array([[0.0, 1.0], [-1.0, 0.0]])
    mapped = interval_map(IntervalMatrix.from_point(m), z)
    expected = linear_map(m, z)
    np.testing.assert_array_equal(mapped.center, expected.center)
    np.testing.assert_array_equal(mapped.generators, expected.generators)


def test_interval_map_symmetric_on_point():
    halfwidth = np.array([[0.1, 0.2], [0.0, 0.3]])
    m = IntervalMatrix.symmetric(halfwidth)
    p = np.array([2.0, -1.0])
    mapped = interval_map(m, Zonotope.point(p))
    hull = interval_hull(mapped)
    expected = halfwidth @ np.abs(p)
    np.testing.assert_allclose(hull.lo, -expected)
    np.testing.assert_allclose(hull.hi, expected)


def test_interval_map_1d_endpoint_oracle():
    m = IntervalMatrix(np.array([[1.0]]), np.array([[2.0]]))
    z = Zonotope([0.0], np.array([[1.0]]))
    mapped = interval_map(m, z)
    hull = interval_hull(mapped)
    # oracle: sup/inf over X in {1, 2} applied to [-1, 1]
    assert hull.lo[0] == pytest.approx(-2.0)
    assert hull.hi[0] == pytest.approx(2.0)


def test_interval_map_encloses_sampled_products():
    rng = np.random.default_rng(9)
    for _ in range(20):
        n = int(rng.integers(1, 4))
        lo = rng.uniform(-1, 0.5, size=(n, n))
        m = IntervalMatrix(lo, lo + rng.uniform(0, 1, size=(n, n)))
        z = random_zonotope(rng, n, int(rng.integers(0, 4)))
        mapped = interval_map(m, z)
        for _ in range(10):
            w = rng.integers(0, 2, size=(n, n))
            x = np.where(w, m.hi, m.lo)
            beta = rng.uniform(-1, 1, size=z.num_generators)
            point = x @ (z.center + z.generators @ beta)
            assert contains_point(mapped, point, tol=1e-9)


def test_hull_step_identity_returns_same_set():
    z = Zonotope([1.0, -2.0], np.array([[0.5, 0.0], [0.0, 0.25]]))
    hull = hull_step(z, np.eye(2))
    np.testing.assert_array_equal(hull.center, z.center)
    np.testing.assert_array_equal(hull.generators, z.generators)


def test_hull_step_of_point_is_segment():
    p = np.array([1.0, 0.0])
    w = np.array([[0.0, -1.0], [1.0, 0.0]])
    seg = hull_step(Zonotope.point(p), w)
    np.testing.assert_allclose(seg.center, 0.5 * (p + w @ p))
    assert seg.num_generators == 1
    np.testing.assert_allclose(seg.generators[:, 0], 0.5 * (p - w @ p))


def test_hull_step_1d_is_exact_interval_hull():
    z = Zonotope([1.0], np.array([[0.1]]))
    hull = hull_step(z, np.array([[2.0]]))
    box = interval_hull(hull)
    # hull of [0.9, 1.1] and [1.8, 2.2]
    assert box.lo[0] == pytest.approx(0.9)
    assert box.hi[0] == pytest.approx(2.2)


def test_hull_step_contains_endpoints_randomized():
    rng = np.random.default_rng(31)
    for _ in range(20):
        n = int(rng.integers(1, 4))
        z = random_zonotope(rng, n, int(rng.integers(1, 4)))
        w = rng.uniform(-1.5, 1.5, size=(n, n))
        hull = hull_step(z, w)
        beta = rng.uniform(-1, 1, size=z.num_generators)
        x = z.center + z.generators @ beta
        assert contains_point(hull, x, tol=1e-9)
        assert contains_point(hull, w @ x, tol=1e-9)


def test_interval_hull_examples():
    p = Zonotope.point([3.0, -1.0])
    hull = interval_hull(p)
    np.testing.assert_array_equal(hull.lo, [3.0, -1.0])
    np.testing.assert_array_equal(hull.hi, [3.0, -1.0])

    z = Zonotope([0.0, 0.0], np.array([[1.0, 1.0], [1.0, -1.0]]))
    hull = interval_hull(z)
    np.testing.assert_array_equal(hull.lo, [-2.0, -2.0])
    np.testing.assert_array_equal(hull.hi, [2.0, 2.0])

    z = Zonotope([5.0], np.array([[0.25]]))
    hull = interval_hull(z)
    assert hull.lo[0] == 4.75 and hull.hi[0] == 5.25


def test_interval_hull_invariant_under_identity_map():
    rng = np.random.default_rng(12)
    z = random_zonotope(rng, 3, 5)
    h1 = interval_hull(z)
    h2 = interval_hull(linear_map(np.eye(3), z))
    np.testing.assert_array_equal(h1.lo, h2.lo)
    np.testing.assert_array_equal(h1.hi, h2.hi)


def test_enclosure_radius_examples():
    assert enclosure_radius(Zonotope.point([0.0, 0.0])) == 0.0
    box = Zonotope([0.0, 0.0], np.eye(2))
    assert enclosure_radius(box) == pytest.approx(math.sqrt(2.0))
    degenerate = Zonotope([0.0, 0.0, 0.0],
                          np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))
    assert enclosure_radius(degenerate) == pytest.approx(math.sqrt(2.0))


def test_support_examples():
    z = Zonotope([5.0], np.array([[0.25]]))
    assert support(z, [1.0]) == pytest.approx(5.25)
    assert support(z, [0.0]) == 0.0
    box = Zonotope([0.0, 0.0], np.eye(2))
    assert support(box, [1.0, 1.0]) == pytest.approx(2.0)


def test_contains_point_examples():
    box = Zonotope([0.0, 0.0], np.eye(2))
    assert contains_point(box, [0.0, 0.0])
    assert contains_point(box, [1.0, 1.0])          # vertex
    assert not contains_point(box, [1.5, 0.0], tol=0.4)
    assert contains_point(box, [1.5, 0.0], tol=0.5)
    p = Zonotope.point([2.0, 2.0])
    assert contains_point(p, [2.0, 2.0])
    assert not contains_point(p, [2.1, 2.0])


def test_contains_point_needs_lp_for_skewed_generators():
    # least squares alone misjudges this one; the LP must decide
    g = np.array([[1.0, 1.0], [0.0, 1e-3]])
    z = Zonotope([0.0, 0.0], g)
    x = g @ np.array([1.0, -1.0])
    assert contains_point(z, x, tol=1e-9)
    assert not contains_point(z, [2.5, 0.0])


def test_reduce_noop_at_target_order():
    z = Zonotope([0.0, 0.0], np.eye(2))
    reduced, err = reduce_order(z, 1.0)
    assert reduced is z
    assert err == 0.0
    with pytest.raises(ValueError):
        reduce_order(z, 0.5)


def test_reduce_three_generators_to_box():
    z = Zonotope([0.0, 0.0],
                 np.array([[1.0, 0.0, 0.1], [0.0, 1.0, 0.1]]))
    reduced, err = reduce_order(z, 1.0)
    assert reduced.num_generators == 2
    hull = interval_hull(reduced)
    np.testing.assert_allclose(hull.lo, [-1.1, -1.1])
    np.testing.assert_allclose(hull.hi, [1.1, 1.1])
    # certified error cannot exceed the radius of the removed part's box
    assert err <= enclosure_radius(Zonotope([0.0, 0.0], z.generators)) + 1e-12


def test_reduce_returns_superset():
    rng = np.random.default_rng(17)
    for trial in range(10):
        n = int(rng.integers(2, 4))
        z = random_zonotope(rng, n, int(rng.integers(n + 1, 9)))
        reduced, _ = reduce_order(z, 1.0)
        betas = rng.uniform(-1, 1, size=(100, z.num_generators))
        pts = z.center[None, :] + betas @ z.generators.T
        for x in pts:
            assert contains_point(reduced, x, tol=1e-9)


def test_reduce_certified_error_brute_force():
    rng = np.random.default_rng(23)
    for trial in range(30):
        n = int(rng.integers(2, 4))
        z = random_zonotope(rng, n, int(rng.integers(n + 1, 10)))
        target = 1.0 + float(rng.integers(0, 2))
        reduced, err = reduce_order(z, target)
        dirs = unit_directions(n)
        gap = directional_hausdorff(reduced, z, dirs)
        assert gap <= err + 1e-9


def test_enclosure_radius_bounds_hausdorff_brute_force():
    # err(S_plus) over-approximates d_H(S, S + S_plus) when 0 is in S_plus
    rng = np.random.default_rng(29)
    for trial in range(30):
        n = int(rng.integers(2, 4))
        base = random_zonotope(rng, n, int(rng.integers(1, 5)))
        extra = random_zonotope(rng, n, int(rng.integers(1, 4)),
                                contains_origin=True)
        total = minkowski_sum(base, extra)
        dirs = unit_directions(n)
        gap = directional_hausdorff(total, base, dirs)
        assert gap <= enclosure_radius(extra) + 1e-9
