"""Logistic regression as a full exponential family: fitting, separation and model cumulants."""
import logging
from dataclasses import dataclass
from typing import Optional
from typing import Sequence
from typing import Union

import numpy as np
import numpy.typing as npt
from scipy.linalg import qr  # type: ignore[import-untyped]
from scipy.special import expit  # type: ignore[import-untyped]

from .errors import DimensionError
from .errors import InputError
from .errors import NoConvergence
from .errors import NoInterceptColumn
from .errors import NonBinaryResponse
from .errors import RankDeficient
from .helpers import bool_to_sign
from .helpers import format_attrs
from .numerics import as_design
from .numerics import as_symmetric
from .numerics import lp_feasible

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-10
SCORE_TOLERANCE = 1e-8
MAX_ITER = 100
TOL = 1e-10
MAX_HALVINGS = 30


class Dataset:
    """Design matrix X (N x D) and binary response t."""

    def __init__(self, X: npt.ArrayLike, t: npt.ArrayLike, intercept_column: Optional[int] = None,
                 column_names: Optional[Sequence[str]] = None) -> None:
        """
        Args:
            X: Design matrix, rows are cases.
            t: Responses, each 0 or 1.
            intercept_column: Index of the all-ones column. Detected automatically if omitted.
            column_names: Optional names of the design columns.

        Raises:
            DimensionError: Shapes do not match or N < D.
            NonBinaryResponse: Some response is neither 0 nor 1.
            NoInterceptColumn: The given intercept column is not all ones.
            RankDeficient: X does not have full column rank.
        """
        self.X = as_design(X)
        t_arr = np.array(t, dtype=float).ravel()
        if self.X.ndim != 2 or self.X.shape[0] != t_arr.size:
            raise DimensionError(f'Design of shape {self.X.shape} does not match {t_arr.size} responses')
        if not np.all(np.isfinite(self.X)):
            raise InputError('Design matrix has non-finite entries')
        if not np.all((t_arr == 0) | (t_arr == 1)):
            raise NonBinaryResponse('Responses must be 0 or 1')
        self.t = t_arr.astype(np.int64)
        self.N, self.D = self.X.shape
        if not self.N >= self.D >= 1:
            raise DimensionError(f'Need N >= D >= 1, got N={self.N}, D={self.D}')
        self.column_names = list(column_names) if column_names is not None else [f'x{j}' for j in range(self.D)]
        self.intercept_column = self._find_intercept(intercept_column)
        self.rank = self._calc_rank()
        if self.rank < self.D:
            raise RankDeficient(f'Design has rank {self.rank} < {self.D} columns')
        self.X.flags.writeable = False
        self.t.flags.writeable = False

        self.attrs_to_print = [('N', ''), ('D', ''), ('rank', ''), ('intercept_column', ''), ('ones', '')]
        self.str_to_replace = [('_', ' '), ('ones', 'responses equal to 1')]

    def _find_intercept(self, intercept_column: Optional[int]) -> Optional[int]:
        ones_cols = [j for j in range(self.D) if np.all(self.X[:, j] == 1)]
        if intercept_column is None:
            return ones_cols[0] if ones_cols else None
        if intercept_column not in ones_cols:
            raise NoInterceptColumn(f'Column {intercept_column} is not all ones')
        return intercept_column

    def _calc_rank(self) -> int:
        """Numerical rank of X after centring the other columns on the intercept and scaling to unit norm."""
        cols = self.X.copy()
        if self.intercept_column is not None:
            others = np.arange(self.D) != self.intercept_column
            cols[:, others] -= cols[:, others].mean(axis=0)
        norms = np.linalg.norm(cols, axis=0)
        cols[:, norms > 0] /= norms[norms > 0]
        r_mat, _ = qr(cols, mode='r', pivoting=True)
        diag = np.abs(np.diag(r_mat))
        if not diag.size or diag[0] == 0:
            return 0
        return int(np.sum(diag > RANK_TOLERANCE * diag[0]))

    @property
    def ones(self) -> int:
        return int(self.t.sum())

    def with_response(self, t: npt.ArrayLike) -> 'Dataset':
        """Same design, new responses."""
        return Dataset(self.X, t, self.intercept_column, self.column_names)

    def __str__(self) -> str:
        return format_attrs(self, self.attrs_to_print, self.str_to_replace)


@dataclass(frozen=True)
class InteriorFit:
    """The MLE exists in the relative interior."""

    beta_hat: npt.NDArray
    probs: npt.NDArray
    fisher: npt.NDArray
    iterations: int
    score_norm: float
    loglik: float


@dataclass(frozen=True)
class BoundaryFit:
    """The likelihood increases without bound along the recession direction; the MLE is on the boundary."""

    recession: npt.NDArray


FitResult = Union[InteriorFit, BoundaryFit]


@dataclass(frozen=True)
class ModelMoments:
    """Mean, covariance and third cumulant tensor of the sufficient statistic X^T t."""

    mu: npt.NDArray
    sigma: npt.NDArray
    kappa3: npt.NDArray


def center_covariates(d: Dataset) -> tuple[Dataset, npt.NDArray]:
    """
    Centres every non-intercept column around its sample mean.

    Args:
        d: Dataset with an intercept column.

    Returns:
        Centred dataset and the subtracted means (0 for the intercept column).

    Raises:
        NoInterceptColumn: The dataset has no intercept column.
    """
    if d.intercept_column is None:
        raise NoInterceptColumn('Centring requires an intercept column')
    offsets = d.X.mean(axis=0)
    offsets[d.intercept_column] = 0.0
    centred = d.X - offsets
    return Dataset(centred, d.t, d.intercept_column, d.column_names), offsets


def uncenter_beta(beta: npt.NDArray, offsets: npt.NDArray, intercept_column: int) -> npt.NDArray:
    """Maps coefficients of the centred design back to the original covariates."""
    res = np.array(beta, dtype=float)
    res[intercept_column] -= float(np.dot(np.delete(beta, intercept_column), np.delete(offsets, intercept_column)))
    return res


def suff_stat(d: Dataset) -> npt.NDArray:
    """The sufficient statistic X^T t."""
    return d.X.T @ d.t


def detect_separation(d: Dataset) -> Optional[npt.NDArray]:
    """
    Looks for a direction of recession: gamma != 0 with (2 t_i - 1) x_i^T gamma >= 0 for all i, strictly for some.

    Args:
        d: Dataset.

    Returns:
        Unit recession direction, or None if the MLE exists in the interior.
    """
    constraints = bool_to_sign(d.t)[:, np.newaxis] * d.X
    gamma = lp_feasible(constraints)
    if gamma is not None:
        logger.debug('Separation found, recession direction %s', gamma)
    return gamma


def linear_predictor(X: npt.NDArray, beta: npt.ArrayLike) -> npt.NDArray:
    return X @ np.asarray(beta, dtype=float)


def log_likelihood(d: Dataset, beta: npt.ArrayLike) -> float:
    """
    Bernoulli log-likelihood sum_i [t_i eta_i - log(1 + exp(eta_i))], eta = X beta, evaluated without overflow.

    Args:
        d: Dataset.
        beta: Coefficients.

    Returns:
        Log-likelihood value (<= 0).
    """
    eta = linear_predictor(d.X, beta)
    return float(np.sum(d.t * eta - np.logaddexp(0.0, eta)))


def score(d: Dataset, beta: npt.ArrayLike) -> npt.NDArray:
    """Gradient of the log-likelihood, X^T (t - p)."""
    return d.X.T @ (d.t - expit(linear_predictor(d.X, beta)))


def _fisher(X: npt.NDArray, probs: npt.NDArray) -> npt.NDArray:
    return as_symmetric((X * (probs * (1 - probs))[:, np.newaxis]).T @ X)


def fit_mle(d: Dataset, max_iter: int = MAX_ITER, tol: float = TOL) -> FitResult:
    """
    Maximum likelihood fit. Separation is tested first; otherwise Newton-Raphson from beta = 0 with step halving.

    Args:
        d: Dataset.
        max_iter: Maximum number of Newton steps.
        tol: Target sup-norm of the score.

    Returns:
        BoundaryFit with the recession direction, or InteriorFit.

    Raises:
        NoConvergence: Iterations exhausted with the score above 1e-8, typically near separation.
    """
    gamma = detect_separation(d)
    if gamma is not None:
        return BoundaryFit(recession=gamma)

    beta = np.zeros(d.D)
    loglik = log_likelihood(d, beta)
    iterations = 0
    for iterations in range(max_iter + 1):
        probs = expit(linear_predictor(d.X, beta))
        grad = d.X.T @ (d.t - probs)
        if np.max(np.abs(grad)) <= tol or iterations == max_iter:
            break
        try:
            step = np.linalg.solve(_fisher(d.X, probs), grad)
        except np.linalg.LinAlgError:
            logger.warning('fit_mle: singular Fisher information at iteration %d', iterations)
            break
        scale = 1.0
        for _ in range(MAX_HALVINGS):
            candidate = beta + scale * step
            cand_loglik = log_likelihood(d, candidate)
            if cand_loglik >= loglik - 1e-12 * (1 + abs(loglik)):
                break
            scale /= 2
        else:
            logger.warning('fit_mle: step halving exhausted at iteration %d', iterations)
            break
        beta, loglik = candidate, cand_loglik

    probs = expit(linear_predictor(d.X, beta))
    score_norm = float(np.max(np.abs(d.X.T @ (d.t - probs))))
    if score_norm > SCORE_TOLERANCE:
        logger.warning('fit_mle: no convergence after %d iterations, score norm %.3e', iterations,
                       score_norm)
        raise NoConvergence(f'Newton iterations did not converge (score norm {score_norm:.3e})', beta=beta,
                            score_norm=score_norm, iterations=iterations)
    return InteriorFit(beta_hat=beta, probs=probs, fisher=_fisher(d.X, probs), iterations=iterations,
                       score_norm=score_norm, loglik=log_likelihood(d, beta))


def model_moments(X: npt.ArrayLike, beta: npt.ArrayLike) -> ModelMoments:
    """
    Cumulants of the sufficient statistic under the model at beta.

    Args:
        X: Design matrix.
        beta: Coefficients.

    Returns:
        mu = X^T p, sigma = X^T diag(p(1-p)) X, kappa3_abc = sum_i x_ia x_ib x_ic p_i (1-p_i) (1-2p_i).
    """
    X_arr = as_design(X)
    probs = expit(linear_predictor(X_arr, beta))
    var = probs * (1 - probs)
    kappa3 = np.einsum('i,ia,ib,ic->abc', var * (1 - 2 * probs), X_arr, X_arr, X_arr)
    return ModelMoments(mu=X_arr.T @ probs, sigma=_fisher(X_arr, probs), kappa3=kappa3)


def log_likelihood_grid(d: Dataset, center: npt.ArrayLike, half_widths: npt.ArrayLike,
                        n: int) -> tuple[npt.NDArray, npt.NDArray, npt.NDArray]:
    """
    Log-likelihood over a rectangular grid of (intercept, slope) values.

    Args:
        d: Dataset with D = 2.
        center: Grid center.
        half_widths: Half-widths along each coordinate.
        n: Points per axis.

    Returns:
        Coordinates along axis 0 and 1, and the n x n table of values (row = axis-0 value).

    Raises:
        DimensionError: D != 2.
    """
    if d.D != 2:
        raise DimensionError(f'Log-likelihood grid needs D = 2, got {d.D}')
    c0, c1 = np.asarray(center, dtype=float)
    h0, h1 = np.asarray(half_widths, dtype=float)
    axis0 = np.linspace(c0 - h0, c0 + h0, n)
    axis1 = np.linspace(c1 - h1, c1 + h1, n)
    b0, b1 = np.meshgrid(axis0, axis1, indexing='ij')
    eta = b0[..., np.newaxis] * d.X[:, 0] + b1[..., np.newaxis] * d.X[:, 1]
    values = np.sum(d.t * eta - np.logaddexp(0.0, eta), axis=-1)
    return axis0, axis1, values
