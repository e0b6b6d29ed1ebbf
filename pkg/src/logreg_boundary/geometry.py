import numpy as np
import numpy.typing as npt


def lineline_intersec(slope0: float, intercept0: float, slope1: float, intercept1: float) -> float:
    """
    Finds the abscissa where two lines y = slope * x + intercept cross.

    Args:
        slope0: Line A, slope.
        intercept0: Line A, intercept.
        slope1: Line B, slope.
        intercept1: Line B, intercept.

    Returns:
        Abscissa of the intersection point.

    Raises:
        RuntimeError: Parallel lines.
    """
    g = slope1 - slope0
    if g == 0:
        raise RuntimeError('Parallel lines!')
    return (intercept0 - intercept1) / g


def get_unit_vector(vec: npt.NDArray) -> npt.NDArray:
    return vec / np.linalg.norm(vec)


def cross2(vec0: npt.NDArray, vec1: npt.NDArray) -> float:
    """z-component of the cross product of two planar vectors."""
    return float(vec0[0] * vec1[1] - vec0[1] * vec1[0])


def is_collinear(vec0: npt.NDArray, vec1: npt.NDArray, tolerance: float = 1e-12) -> bool:
    """True if the vectors are parallel and point the same way."""
    scale = np.linalg.norm(vec0) * np.linalg.norm(vec1)
    return abs(cross2(vec0, vec1)) <= tolerance * scale and float(np.dot(vec0, vec1)) > 0


def point_on_segment(seg_st: npt.NDArray, seg_en: npt.NDArray, lam: float) -> npt.NDArray:
    return seg_st + lam * (seg_en - seg_st)
