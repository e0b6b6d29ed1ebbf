import itertools

import numpy as np
import pytest
from assertpy import assert_that
from assertpy import soft_assertions
from scipy.spatial import ConvexHull  # type: ignore[import-untyped]

from src.logreg_boundary.boundary_polytope import connected_vertices
from src.logreg_boundary.boundary_polytope import design_line_family
from src.logreg_boundary.boundary_polytope import envelope_of_lines
from src.logreg_boundary.boundary_polytope import LineFamily
from src.logreg_boundary.boundary_polytope import min_mahalanobis_to_polytope_boundary
from src.logreg_boundary.boundary_polytope import response_patterns
from src.logreg_boundary.boundary_polytope import suffstat_polytope_2d
from src.logreg_boundary.boundary_polytope import SuffStatPolytope
from src.logreg_boundary.errors import CenterOutside
from src.logreg_boundary.errors import DimensionError
from src.logreg_boundary.errors import DomainError
from src.logreg_boundary.errors import NotPositiveDefinite

FOUR_LINES = [(1, 1), (2, 4), (3, 9), (4, -1)]


def _shoelace_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def test_envelope_four_lines() -> None:
    env = envelope_of_lines(LineFamily(FOUR_LINES))
    with soft_assertions():
        assert_that(set(env.redundant)).is_equal_to({1})
        assert_that([idx for idx, _ in env.upper]).is_equal_to([0, 2, 3])
        assert_that([idx for idx, _ in env.lower]).is_equal_to([3, 0])
        assert_that(env.upper[0][1][1]).is_close_to(-4.0, 1e-14)
        assert_that(env.upper[1][1]).is_equal_to((-4.0, 10.0))
        assert_that(env.upper[2][1][0]).is_close_to(10.0, 1e-14)
        assert_that(env.lower[0][1][1]).is_close_to(2 / 3, 1e-14)
        assert_that(env.upper[0][1][0]).is_equal_to(-np.inf)
        assert_that(env.upper[-1][1][1]).is_equal_to(np.inf)
        assert_that(connected_vertices(LineFamily(FOUR_LINES))).is_equal_to({0, 2, 3})
        assert_that(len(connected_vertices(LineFamily(FOUR_LINES)))).is_equal_to(3)


def test_envelope_two_lines() -> None:
    env = envelope_of_lines(LineFamily([(1, 0), (-2, 5)]))
    with soft_assertions():
        assert_that(env.redundant).is_empty()
        assert_that({idx for idx, _ in env.upper}).is_equal_to({0, 1})
        assert_that({idx for idx, _ in env.lower}).is_equal_to({0, 1})


def test_envelope_slope_ties_and_duplicates() -> None:
    env = envelope_of_lines(LineFamily([(1, 0), (1, 2), (0, 0), (1, 2), (-1, 0)]))
    with soft_assertions():
        assert_that(set(env.members)).is_equal_to({0, 1, 3, 4})
        assert_that(set(env.redundant)).is_equal_to({2})


def test_line_family_validation() -> None:
    with soft_assertions():
        assert_that(LineFamily).raises(DomainError).when_called_with([(1, 1)])
        assert_that(LineFamily).raises(DomainError).when_called_with([(1, 1), (np.nan, 2)])


def _grid_members(family: LineFamily) -> set[int]:
    # integer coefficients: breakpoints lie in [-40, 40], pieces are at least 1/132 long
    theta = np.arange(-45.0, 45.0, 0.002) + 1e-4 * np.sqrt(2)
    values = family.values(theta)
    members = set(np.argmax(values, axis=1).tolist()) | set(np.argmin(values, axis=1).tolist())
    for sign in (1, -1):
        for pick in (np.argmax, np.argmin):
            tail = family.values(np.array([sign * 1e12]))[0]
            members.add(int(pick(tail)))
    return members


def test_envelope_matches_grid_scan() -> None:
    rng = np.random.default_rng(79)
    for _ in range(1000):
        n = int(rng.integers(2, 11))
        family = LineFamily(np.column_stack((rng.integers(-6, 7, size=n), rng.integers(-20, 21, size=n))))
        members = envelope_of_lines(family).members
        unique_members = {min(np.nonzero((family.slopes == family.slopes[i])
                                         & (family.intercepts == family.intercepts[i]))[0]) for i in members}
        grid = {min(np.nonzero((family.slopes == family.slopes[i])
                               & (family.intercepts == family.intercepts[i]))[0]) for i in _grid_members(family)}
        assert_that(unique_members).is_equal_to(grid)


def test_envelope_pieces_partition_line() -> None:
    rng = np.random.default_rng(83)
    for _ in range(200):
        n = int(rng.integers(2, 9))
        family = LineFamily(rng.normal(size=(n, 2)))
        env = envelope_of_lines(family)
        for pieces, sign in ((env.upper, 1), (env.lower, -1)):
            bounds = [interval for _, interval in pieces]
            slopes = [family.slopes[idx] for idx, _ in pieces]
            assert_that(bounds[0][0]).is_equal_to(-np.inf)
            assert_that(bounds[-1][1]).is_equal_to(np.inf)
            assert_that(all(a[1] == b[0] for a, b in zip(bounds[:-1], bounds[1:]))).is_true()
            assert_that(all(sign * (b - a) > 0 for a, b in zip(slopes[:-1], slopes[1:]))).is_true()


def test_design_line_family_threshold_vertices() -> None:
    X = np.column_stack((np.ones(5), [-2.0, -1.0, 0.5, 1.0, 3.0]))
    family, patterns = design_line_family(X)
    connected = connected_vertices(family)
    thresholds = {tuple([0] * h + [1] * (5 - h)) for h in range(6)} | {tuple([1] * h + [0] * (5 - h))
                                                                       for h in range(6)}
    reached = {tuple(patterns[i]) for i in connected}
    with soft_assertions():
        assert_that(len(family)).is_equal_to(32)
        assert_that(reached).is_equal_to(thresholds)
        assert_that(len(reached)).is_equal_to(10)
    assert_that(design_line_family).raises(DimensionError).when_called_with(np.ones((3, 3)))


def test_response_patterns() -> None:
    with soft_assertions():
        assert_that(response_patterns(2).tolist()).is_equal_to([[0, 0], [0, 1], [1, 0], [1, 1]])
        assert_that(response_patterns(16).shape).is_equal_to((65536, 16))
    assert_that(response_patterns).raises(DimensionError).when_called_with(17)


def test_polytope_three_rows() -> None:
    poly = suffstat_polytope_2d([[1, 1], [1, 2], [1, 3]])
    with soft_assertions():
        assert_that(poly.vertices.tolist()).is_equal_to([[0, 0], [1, 1], [2, 3], [3, 6], [2, 5], [1, 3]])
        assert_that(poly.vertex_patterns.tolist()).is_equal_to([[0, 0, 0], [1, 0, 0], [1, 1, 0], [1, 1, 1],
                                                                [0, 1, 1], [0, 0, 1]])
        assert_that(poly.is_convex()).is_true()
        assert_that(poly.edges).is_length(6)
        assert_that(_shoelace_area(poly.vertices)).is_greater_than(0)


def test_polytope_single_row() -> None:
    poly = suffstat_polytope_2d([[1, 1]])
    assert_that(poly.vertices.tolist()).is_equal_to([[0, 0], [1, 1]])


def test_polytope_collinear_rows_merge() -> None:
    poly = suffstat_polytope_2d([[1, 2], [1, 2]])
    with soft_assertions():
        assert_that(poly.vertices.tolist()).is_equal_to([[0, 0], [2, 4]])
        assert_that(poly.vertex_patterns.tolist()).is_equal_to([[0, 0], [1, 1]])


def test_polytope_zero_rows_skipped() -> None:
    poly = suffstat_polytope_2d([[1, -1], [0, 0], [1, 1]])
    with soft_assertions():
        assert_that(len(poly.vertices)).is_equal_to(4)
        assert_that(poly.vertex_patterns[:, 1].tolist()).is_equal_to([0, 0, 0, 0])


def test_polytope_dimension() -> None:
    assert_that(suffstat_polytope_2d).raises(DimensionError).when_called_with(np.ones((4, 3)))


def _hull_vertices(points: np.ndarray) -> set[tuple[float, float]]:
    uniq = np.unique(np.round(points, 9), axis=0)
    hull = ConvexHull(uniq)
    return {tuple(uniq[i]) for i in hull.vertices}


def test_polytope_matches_brute_force_hull() -> None:
    rng = np.random.default_rng(89)
    for _ in range(100):
        n = int(rng.integers(2, 13))
        X = np.column_stack((np.ones(n), rng.integers(-6, 7, size=n))).astype(float)
        if np.unique(X[:, 1]).size < 2:
            continue
        poly = suffstat_polytope_2d(X)
        expected = _hull_vertices(response_patterns(n) @ X)
        with soft_assertions():
            assert_that({tuple(v) for v in np.round(poly.vertices, 9)}).is_equal_to(expected)
            assert_that(np.array_equal(poly.vertex_patterns @ X, poly.vertices)).is_true()
            assert_that(poly.is_convex()).is_true()


def test_polytope_general_rows_match_hull() -> None:
    rng = np.random.default_rng(97)
    for _ in range(100):
        n = int(rng.integers(2, 11))
        X = rng.integers(-4, 5, size=(n, 2)).astype(float)
        X[np.all(X == 0, axis=1)] = [1.0, 1.0]
        if np.linalg.matrix_rank(X) < 2:
            continue
        poly = suffstat_polytope_2d(X)
        assert_that({tuple(v) for v in np.round(poly.vertices, 9)}).is_equal_to(
            _hull_vertices(response_patterns(n) @ X))
        assert_that(_shoelace_area(poly.vertices)).is_greater_than(0)


def _is_threshold(pattern: np.ndarray) -> bool:
    changes = int(np.count_nonzero(np.diff(pattern)))
    return changes <= 1


def test_threshold_patterns_for_monotone_covariate() -> None:
    rng = np.random.default_rng(101)
    for _ in range(100):
        n = int(rng.integers(2, 13))
        x = np.sort(rng.choice(np.arange(-30, 31), size=n, replace=False)).astype(float)
        X = np.column_stack((np.ones(n), x))
        poly = suffstat_polytope_2d(X)
        expected = _hull_vertices(response_patterns(n) @ X)
        with soft_assertions():
            assert_that(len(poly.vertices)).is_equal_to(2 * n)
            assert_that({tuple(v) for v in poly.vertices}).is_equal_to(expected)
            assert_that(all(_is_threshold(pat) for pat in poly.vertex_patterns)).is_true()


def test_mahalanobis_unit_square() -> None:
    square = SuffStatPolytope(vertices=np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
                              vertex_patterns=np.zeros((4, 1), dtype=np.int64))
    res = min_mahalanobis_to_polytope_boundary(square, [0.5, 0.5], np.eye(2))
    with soft_assertions():
        assert_that(res.dist_sq).is_close_to(0.25, 1e-15)
        assert_that(res.lam).is_close_to(0.5, 1e-15)
        assert_that(res.closest.tolist()).is_equal_to([0.5, 0.0])


@pytest.mark.parametrize('center', [[1.0, 0.5], [0.0, 0.0], [2.0, 0.5]])
def test_mahalanobis_center_outside(center: list[float]) -> None:
    square = SuffStatPolytope(vertices=np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
                              vertex_patterns=np.zeros((4, 1), dtype=np.int64))
    try:
        min_mahalanobis_to_polytope_boundary(square, center, np.eye(2))
    except CenterOutside as exc:
        assert_that(exc.payload['dist_sq']).is_equal_to(0.0)
        assert_that(exc.payload['edge']).is_length(2)
    else:
        pytest.fail('CenterOutside not raised')


def test_mahalanobis_metric_not_positive_definite() -> None:
    poly = suffstat_polytope_2d([[1, 1], [1, 2], [1, 3]])
    assert_that(min_mahalanobis_to_polytope_boundary).raises(NotPositiveDefinite).when_called_with(
        poly, [1.5, 3.0], [[1.0, 0.0], [0.0, -1.0]])


def _random_spd(rng: np.random.Generator) -> np.ndarray:
    a_mat = rng.normal(size=(2, 2))
    return a_mat @ a_mat.T + 0.2 * np.eye(2)


def test_mahalanobis_matches_boundary_sampling() -> None:
    rng = np.random.default_rng(103)
    for _ in range(20):
        n = int(rng.integers(3, 8))
        X = np.column_stack((np.ones(n), np.sort(rng.choice(np.arange(-9, 10), size=n, replace=False))))
        poly = suffstat_polytope_2d(X)
        weights = rng.dirichlet(np.ones(len(poly.vertices)))
        center = weights @ poly.vertices
        metric = _random_spd(rng)
        res = min_mahalanobis_to_polytope_boundary(poly, center, metric)
        lam = np.linspace(0, 1, 100000 // len(poly.vertices))
        best = np.inf
        for a, b in poly.edges:
            pts = poly.vertices[a] + lam[:, np.newaxis] * (poly.vertices[b] - poly.vertices[a]) - center
            best = min(best, float(np.min(np.einsum('ia,ab,ib->i', pts, metric, pts))))
        with soft_assertions():
            assert_that(res.dist_sq).is_less_than_or_equal_to(best + 1e-9 * max(1.0, best))
            assert_that(res.dist_sq).is_close_to(best, 1e-4 * max(1.0, best))
            a, b = res.edge
            point = poly.vertices[a] + res.lam * (poly.vertices[b] - poly.vertices[a])
            assert_that(float(np.linalg.norm(res.closest - point))).is_less_than_or_equal_to(1e-10)
            assert_that(res.lam).is_between(0.0, 1.0)


def test_mahalanobis_metric_scaling() -> None:
    rng = np.random.default_rng(107)
    poly = suffstat_polytope_2d(np.column_stack((np.ones(6), [-3, -1, 0, 2, 5, 6])))
    center = poly.vertices.mean(axis=0)
    metric = _random_spd(rng)
    base = min_mahalanobis_to_polytope_boundary(poly, center, metric)
    for scale in (0.5, 3.0, 1e4):
        scaled = min_mahalanobis_to_polytope_boundary(poly, center, scale * metric)
        with soft_assertions():
            assert_that(scaled.dist_sq).is_close_to(scale * base.dist_sq, 1e-12 * scale * base.dist_sq)
            assert_that(scaled.edge).is_equal_to(base.edge)
            assert_that(np.allclose(scaled.closest, base.closest, rtol=0, atol=1e-12)).is_true()


def test_vertex_patterns_are_exact() -> None:
    X = np.array([[1, -2], [1, 4], [1, 4], [1, 7], [1, -5]], dtype=float)
    poly = suffstat_polytope_2d(X)
    brute = {tuple(row) for row in (np.array(list(itertools.product((0, 1), repeat=5))) @ X).tolist()}
    with soft_assertions():
        assert_that(np.array_equal(poly.vertex_patterns @ X, poly.vertices)).is_true()
        assert_that({tuple(v) for v in poly.vertices.tolist()}).is_subset_of(brute)
        assert_that(poly.closed_vertices()[-1].tolist()).is_equal_to(poly.vertices[0].tolist())
