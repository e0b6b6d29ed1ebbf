import numpy as np
import numpy.typing as npt
from scipy.linalg import solve_triangular  # type: ignore[import-untyped]


def circle_points(n: int, radius: float) -> npt.NDArray:
    """n points on the circle of the given radius around the origin, equally spaced in angle from the x axis."""
    ang = 2 * np.pi * np.arange(n) / n
    return radius * np.column_stack((np.cos(ang), np.sin(ang)))


def half_plane_angle(vec: npt.NDArray) -> float:
    """Polar angle of a nonzero planar vector folded into [0, pi)."""
    return float(np.remainder(np.arctan2(vec[1], vec[0]), np.pi))


def whiten(points: npt.NDArray, center: npt.NDArray, chol: npt.NDArray) -> npt.NDArray:
    """
    Maps points z to standardized coordinates y = L^-1 (z - center).

    Args:
        points: Points as rows, shape (..., D).
        center: Center, shape (D,).
        chol: Lower-triangular factor L of the covariance.

    Returns:
        Standardized points, same shape as the input.
    """
    diffs = np.asarray(points, dtype=float) - center
    flat = diffs.reshape(-1, diffs.shape[-1])
    solved = solve_triangular(chol, flat.T, lower=True).T
    return solved.reshape(diffs.shape)
