"""Small dense numerical kernels shared by the other modules."""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import numpy.typing as npt
from scipy import stats  # type: ignore[import-untyped]
from scipy.optimize import linprog  # type: ignore[import-untyped]

from .errors import DimensionError
from .errors import DomainError
from .errors import NotPositiveDefinite
from .geometry import get_unit_vector

logger = logging.getLogger(__name__)

MAX_LP_DIM = 10
LP_TOLERANCE = 1e-10
PIVOT_TOLERANCE = 1e-14


def as_symmetric(m: npt.ArrayLike) -> npt.NDArray:
    """
    Returns a float copy of a square matrix mirrored from its lower triangle, so entries[i][j] == entries[j][i]
    holds exactly.

    Args:
        m: Square matrix.

    Returns:
        Symmetric matrix.

    Raises:
        DimensionError: The matrix is not square or empty.
    """
    arr = np.array(m, dtype=float, ndmin=2)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or not arr.shape[0]:
        raise DimensionError(f'Square matrix expected, got shape {arr.shape}')
    lower = np.tril(arr)
    return lower + np.tril(arr, -1).T


def as_design(X: npt.ArrayLike) -> npt.NDArray:
    """
    Float copy of a design matrix with cases as rows; a 1-D input is a single column.

    Raises:
        DimensionError: More than 2 dimensions.
    """
    arr = np.array(X, dtype=float)
    if arr.ndim < 2:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionError(f'Design matrix expected, got shape {arr.shape}')
    return arr


def sym_eigen(m: npt.ArrayLike) -> tuple[npt.NDArray, npt.NDArray]:
    """
    Eigendecomposition of a symmetric matrix.

    Args:
        m: Symmetric matrix.

    Returns:
        Eigenvalues sorted descending, and the matching orthonormal eigenvectors as columns.
    """
    vals, vecs = np.linalg.eigh(as_symmetric(m))
    return vals[::-1], vecs[:, ::-1]


def chi2_quantile(df: int, p: float) -> float:
    """
    Quantile of the chi-squared distribution.

    Args:
        df: Degrees of freedom, 1 <= df <= 50.
        p: Probability, 0 < p < 1.

    Returns:
        x such that P(chi2_df <= x) = p.

    Raises:
        DomainError: p or df out of range.
    """
    if not 0 < p < 1:
        raise DomainError(f'Probability must lie in (0, 1), got {p}')
    if not 1 <= df <= 50 or int(df) != df:
        raise DomainError(f'Degrees of freedom must be an integer in [1, 50], got {df}')
    if df == 2:
        return float(-2 * np.log1p(-p))
    return float(stats.chi2.ppf(p, df))


def cholesky(m: npt.ArrayLike) -> npt.NDArray:
    """
    Cholesky factor of a positive definite matrix.

    Args:
        m: Symmetric positive definite matrix.

    Returns:
        Lower-triangular L with L L^T = m.

    Raises:
        NotPositiveDefinite: A pivot is below dim * 1e-14 * max|m|. Near-singular Fisher information signals
            proximity to the boundary.
    """
    sym = as_symmetric(m)
    dim = sym.shape[0]
    limit = dim * PIVOT_TOLERANCE * float(np.max(np.abs(sym)))
    try:
        chol = np.linalg.cholesky(sym)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f'Matrix is not positive definite: {exc}') from exc
    pivots = np.square(np.diag(chol))
    if limit == 0 or np.any(pivots <= limit):
        raise NotPositiveDefinite(f'Matrix is numerically singular (min pivot {np.min(pivots):.3e}, '
                                  f'limit {limit:.3e})')
    return chol


def lp_feasible(constraints: npt.ArrayLike) -> Optional[npt.NDArray]:
    """
    Looks for a nonzero direction gamma with a_i^T gamma >= 0 for all rows a_i and at least one strict inequality.

    The LP maximizes (sum_i a_i)^T gamma over the cone a_i^T gamma >= 0 intersected with the box [-1, 1]^D. Every
    feasible term is nonnegative, so the optimum is positive iff some inequality can be made strict.

    Args:
        constraints: Matrix whose rows are the a_i, D <= 10 columns.

    Returns:
        Unit-length gamma, or None if only gamma = 0 satisfies the system.

    Raises:
        DimensionError: Too many columns.
    """
    a_mat = np.array(constraints, dtype=float, ndmin=2)
    dim = a_mat.shape[1]
    if dim > MAX_LP_DIM:
        raise DimensionError(f'At most {MAX_LP_DIM} columns supported, got {dim}')
    objective = -a_mat.sum(axis=0)
    if not np.any(objective):
        return None
    res = linprog(objective, A_ub=-a_mat, b_ub=np.zeros(a_mat.shape[0]), bounds=[(-1, 1)] * dim, method='highs')
    if res.status != 0:
        logger.warning('lp_feasible: solver returned status %d (%s)', res.status, res.message)
        return None
    if -res.fun <= LP_TOLERANCE:
        return None
    gamma = get_unit_vector(res.x)
    gamma[np.abs(gamma) < 1e-12] = 0.0
    return get_unit_vector(gamma)


@dataclass(frozen=True)
class RngStream:
    """
    Reproducible random stream identified by (seed, stream_id).

    The generator is Philox-4x64-10 (counter-based). The key is (seed, stream_id); the counter starts at
    (0, 0, replicate, 0), so each replicate index owns a disjoint block of the counter space. Identical
    (seed, stream_id, replicate) always yield the identical sequence, whatever the thread schedule.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ('seed', 'stream_id'):
            val = getattr(self, name)
            if not 0 <= val < 2 ** 64:
                raise DomainError(f'{name} must be a 64-bit unsigned integer, got {val}')

    def generator(self, replicate: int = 0) -> np.random.Generator:
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        counter = np.array([0, 0, replicate, 0], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(counter=counter, key=key))

    def split(self, stream_id: int) -> 'RngStream':
        return RngStream(self.seed, stream_id)
