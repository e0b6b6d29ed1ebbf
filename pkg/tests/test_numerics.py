import numpy as np
import pytest
from assertpy import assert_that
from assertpy import soft_assertions
from scipy.special import gammainc  # type: ignore[import-untyped]

from src.logreg_boundary.errors import DimensionError
from src.logreg_boundary.errors import DomainError
from src.logreg_boundary.errors import NotPositiveDefinite
from src.logreg_boundary.numerics import as_design
from src.logreg_boundary.numerics import as_symmetric
from src.logreg_boundary.numerics import chi2_quantile
from src.logreg_boundary.numerics import cholesky
from src.logreg_boundary.numerics import lp_feasible
from src.logreg_boundary.numerics import RngStream
from src.logreg_boundary.numerics import sym_eigen

THIRDS = [[2 / 9, -1 / 9], [-1 / 9, 2 / 9]]


@pytest.mark.parametrize(
    'mat, expected', [
        [np.eye(2), [1.0, 1.0]],
        [np.diag([3.0, 1.0]), [3.0, 1.0]],
        [np.diag([1.0, 3.0]), [3.0, 1.0]],
        [THIRDS, [1 / 3, 1 / 9]]
    ]
)
def test_sym_eigen_examples(mat: list[list[float]], expected: list[float]) -> None:
    vals, vecs = sym_eigen(mat)
    with soft_assertions():
        assert_that(np.allclose(vals, expected, rtol=0, atol=1e-14)).is_true()
        assert_that(np.allclose(vecs @ np.diag(vals) @ vecs.T, mat, rtol=0, atol=1e-14)).is_true()


def test_sym_eigen_axis_aligned_vectors() -> None:
    _, vecs = sym_eigen(np.diag([3.0, 1.0]))
    assert_that(np.allclose(np.abs(vecs), np.eye(2))).is_true()


def test_sym_eigen_random() -> None:
    rng = np.random.default_rng(11)
    for _ in range(1000):
        dim = int(rng.integers(1, 9))
        a_mat = rng.normal(size=(dim, dim))
        mat = as_symmetric(a_mat + a_mat.T)
        vals, vecs = sym_eigen(mat)
        scale = 1 + np.max(np.abs(mat))
        with soft_assertions():
            assert_that(np.all(np.diff(vals) <= 0)).is_true()
            assert_that(np.max(np.abs(vecs.T @ vecs - np.eye(dim)))).is_less_than_or_equal_to(1e-9)
            assert_that(np.max(np.abs(vecs @ np.diag(vals) @ vecs.T - mat))).is_less_than_or_equal_to(1e-10 * scale)


def test_as_design() -> None:
    rows = [[1, 2], [3, 4], [5, 6]]
    design = as_design(rows)
    with soft_assertions():
        assert_that(as_design([1, 2, 3]).tolist()).is_equal_to([[1.0], [2.0], [3.0]])
        assert_that(as_design(4.0).shape).is_equal_to((1, 1))
        assert_that(design.dtype).is_equal_to(np.dtype(float))
        assert_that(design.tolist()).is_equal_to([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
        assert_that(as_design).raises(DimensionError).when_called_with(np.zeros((2, 2, 2)))
    design[0, 0] = 9.0
    assert_that(rows[0][0]).is_equal_to(1)


def test_as_symmetric_exact() -> None:
    mat = as_symmetric([[1.0, 5.0], [2.0, 3.0]])
    with soft_assertions():
        assert_that(mat[0, 1]).is_equal_to(mat[1, 0])
        assert_that(mat[0, 1]).is_equal_to(2.0)
    assert_that(as_symmetric).raises(DimensionError).when_called_with(np.ones((2, 3)))


@pytest.mark.parametrize(
    'df, p, expected, tolerance', [
        [2, 0.99, 9.21034037197618, 1e-12],
        [2, 0.5, 1.3862943611198906, 1e-12],
        [1, 0.95, 3.841458820694124, 1e-8]
    ]
)
def test_chi2_quantile_examples(df: int, p: float, expected: float, tolerance: float) -> None:
    assert_that(chi2_quantile(df, p)).is_close_to(expected, tolerance)


def test_chi2_quantile_inverts_incomplete_gamma() -> None:
    for df in (1, 2, 3, 7, 20, 50):
        for p in (0.001, 0.1, 0.5, 0.9, 0.99, 0.999):
            assert_that(gammainc(df / 2, chi2_quantile(df, p) / 2)).is_close_to(p, 1e-8)


def test_chi2_quantile_df2_closed_form() -> None:
    for p in np.linspace(0.01, 0.99, 99):
        assert_that(chi2_quantile(2, float(p))).is_close_to(-2 * np.log(1 - p), 1e-10)


def test_chi2_quantile_monotone() -> None:
    probs = np.linspace(0.01, 0.99, 25)
    table = np.array([[chi2_quantile(df, float(p)) for p in probs] for df in range(1, 51)])
    with soft_assertions():
        assert_that(np.all(np.diff(table, axis=1) > 0)).is_true()
        assert_that(np.all(np.diff(table, axis=0) > 0)).is_true()


@pytest.mark.parametrize('df, p', [[2, 0.0], [2, 1.0], [2, -0.5], [0, 0.5], [51, 0.5], [1.5, 0.5]])
def test_chi2_quantile_domain(df: float, p: float) -> None:
    assert_that(chi2_quantile).raises(DomainError).when_called_with(df, p)


@pytest.mark.parametrize(
    'mat, expected', [
        [np.eye(3), np.eye(3)],
        [np.diag([4.0, 9.0]), np.diag([2.0, 3.0])]
    ]
)
def test_cholesky_examples(mat: np.ndarray, expected: np.ndarray) -> None:
    assert_that(np.allclose(cholesky(mat), expected, rtol=0, atol=1e-15)).is_true()


def test_cholesky_round_trip() -> None:
    chol = cholesky(THIRDS)
    with soft_assertions():
        assert_that(np.allclose(np.triu(chol, 1), 0)).is_true()
        assert_that(np.max(np.abs(chol @ chol.T - np.array(THIRDS)))).is_less_than_or_equal_to(1e-10 * 2 / 9)


@pytest.mark.parametrize(
    'mat', [
        [[1.0, 1.0], [1.0, 1.0]],
        [[1.0, 0.0], [0.0, -1.0]],
        [[1.0, 0.0], [0.0, 1e-17]],
        [[0.0, 0.0], [0.0, 0.0]]
    ]
)
def test_cholesky_not_positive_definite(mat: list[list[float]]) -> None:
    assert_that(cholesky).raises(NotPositiveDefinite).when_called_with(mat)


def test_lp_feasible_pinned_coordinate() -> None:
    gamma = lp_feasible([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    assert_that(gamma).is_not_none()
    assert_that(np.allclose(gamma, [0.0, 1.0], atol=1e-12)).is_true()


def test_lp_feasible_forced_zero() -> None:
    assert_that(lp_feasible([[1.0], [-1.0]])).is_none()


def test_lp_feasible_too_many_columns() -> None:
    assert_that(lp_feasible).raises(DimensionError).when_called_with(np.ones((3, 11)))


def _strictly_feasible_on_grid(constraints: np.ndarray, n: int = 10000) -> bool:
    ang = 2 * np.pi * np.arange(n) / n
    dirs = np.column_stack((np.cos(ang), np.sin(ang)))
    prods = constraints @ dirs.T
    return bool(np.any((prods.min(axis=0) >= 0) & (prods.max(axis=0) > 0)))


def test_lp_feasible_separable_cloud() -> None:
    rng = np.random.default_rng(3)
    for _ in range(50):
        normal = rng.normal(size=2)
        points = rng.normal(size=(15, 2))
        signs = np.where(points @ normal > 0, 1.0, -1.0)
        constraints = signs[:, np.newaxis] * points
        gamma = lp_feasible(constraints)
        assert_that(gamma).is_not_none()
        prods = constraints @ gamma
        with soft_assertions():
            assert_that(float(np.linalg.norm(gamma))).is_close_to(1.0, 1e-12)
            assert_that(prods.min()).is_greater_than_or_equal_to(-1e-9)
            assert_that(prods.max()).is_greater_than(0)


def test_lp_feasible_matches_direction_grid() -> None:
    rng = np.random.default_rng(5)
    for _ in range(100):
        constraints = rng.normal(size=(int(rng.integers(2, 7)), 2))
        gamma = lp_feasible(constraints)
        if gamma is None:
            assert_that(_strictly_feasible_on_grid(constraints)).is_false()
        else:
            prods = constraints @ gamma
            assert_that(prods.min()).is_greater_than_or_equal_to(-1e-9)
            assert_that(prods.max()).is_greater_than(0)


def test_rng_stream_reproducible() -> None:
    stream = RngStream(seed=2024, stream_id=1)
    with soft_assertions():
        assert_that(stream.generator(5).random(8).tolist()).is_equal_to(
            RngStream(2024, 1).generator(5).random(8).tolist())
        assert_that(stream.generator(5).random(8).tolist()).is_not_equal_to(stream.generator(6).random(8).tolist())
        assert_that(stream.generator(5).random(8).tolist()).is_not_equal_to(
            stream.split(2).generator(5).random(8).tolist())
        assert_that(stream.split(2)).is_equal_to(RngStream(2024, 2))


@pytest.mark.parametrize('seed, stream_id', [[-1, 0], [2 ** 64, 0], [0, -3]])
def test_rng_stream_range(seed: int, stream_id: int) -> None:
    assert_that(RngStream).raises(DomainError).when_called_with(seed, stream_id)
