import numpy as np
from assertpy import assert_that
from assertpy import soft_assertions

from src.logreg_boundary.transforms import circle_points
from src.logreg_boundary.transforms import half_plane_angle
from src.logreg_boundary.transforms import whiten


def test_circle_points() -> None:
    pts = circle_points(4, 2.0)
    with soft_assertions():
        assert_that(pts.shape).is_equal_to((4, 2))
        assert_that(np.allclose(pts, [[2.0, 0.0], [0.0, 2.0], [-2.0, 0.0], [0.0, -2.0]], atol=1e-15)).is_true()
        assert_that(np.allclose(np.hypot(*circle_points(7, 3.0).T), 3.0, rtol=0, atol=1e-15)).is_true()


def test_half_plane_angle() -> None:
    with soft_assertions():
        assert_that(half_plane_angle(np.array([1.0, 0.0]))).is_equal_to(0.0)
        assert_that(half_plane_angle(np.array([-1.0, 1.0]))).is_close_to(3 * np.pi / 4, 1e-15)
        assert_that(half_plane_angle(np.array([-1.0, -1.0]))).is_close_to(np.pi / 4, 1e-15)


def test_whiten() -> None:
    rng = np.random.default_rng(7)
    a_mat = rng.normal(size=(3, 3))
    chol = np.linalg.cholesky(a_mat @ a_mat.T + 3 * np.eye(3))
    center = rng.normal(size=3)
    points = rng.normal(size=(4, 5, 3))
    white = whiten(points, center, chol)
    with soft_assertions():
        assert_that(white.shape).is_equal_to(points.shape)
        assert_that(np.allclose(white[1, 2], np.linalg.solve(chol, points[1, 2] - center))).is_true()
        assert_that(np.allclose(white @ chol.T + center, points)).is_true()
