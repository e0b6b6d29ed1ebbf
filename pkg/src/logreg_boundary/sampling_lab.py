"""Sampling experiments under a fitted model: sufficient statistics, MLEs, skewness and the Edgeworth density."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable
from typing import Generic
from typing import Optional
from typing import TypeVar

import numpy as np
import numpy.typing as npt
from scipy import stats  # type: ignore[import-untyped]
from scipy.special import expit  # type: ignore[import-untyped]

from .boundary_polytope import response_patterns
from .boundary_polytope import SuffStatPolytope
from .errors import DegenerateSample
from .errors import DomainError
from .errors import NoConvergence
from .logistic_model import BoundaryFit
from .logistic_model import Dataset
from .logistic_model import detect_separation
from .logistic_model import fit_mle
from .logistic_model import FitResult
from .logistic_model import linear_predictor
from .logistic_model import ModelMoments
from .numerics import as_design
from .numerics import cholesky
from .numerics import RngStream
from .transforms import whiten

logger = logging.getLogger(__name__)

DEFAULT_REPS = 10000
MIN_VARIANCE = 1e-300

R = TypeVar('R')


@dataclass(frozen=True)
class SuffStatSample:
    """Sampled sufficient statistics X^T t with per-draw separation flags and the stream they came from."""

    draws: npt.NDArray
    on_boundary: npt.NDArray
    seed: int
    stream_id: int

    @property
    def boundary_rate(self) -> float:
        return float(np.mean(self.on_boundary)) if self.on_boundary.size else 0.0


@dataclass(frozen=True)
class MleSample:
    """Interior MLEs of the replicates; boundary replicates (and non-converged ones) are only counted."""

    interior_estimates: npt.NDArray
    boundary_count: int
    total: int
    no_convergence_count: int = 0

    @property
    def boundary_rate(self) -> float:
        return self.boundary_count / self.total if self.total else 0.0


@dataclass(frozen=True)
class ExactDistribution:
    """Exact distribution of X^T t by enumeration: distinct values, their probabilities and separation flags."""

    values: npt.NDArray
    probs: npt.NDArray
    on_boundary: npt.NDArray

    @property
    def boundary_probability(self) -> float:
        return float(self.probs[self.on_boundary].sum())

    @property
    def mean(self) -> npt.NDArray:
        return self.probs @ self.values


class _PatternCache(Generic[R]):
    """Memoizes per-pattern results: replicates sharing a response pattern share the fit."""

    def __init__(self, func: Callable[[npt.NDArray], R]) -> None:
        self.func = func
        self.results: dict[bytes, R] = {}

    def __call__(self, t: npt.NDArray) -> R:
        key = t.tobytes()
        if key not in self.results:
            self.results[key] = self.func(t)
        return self.results[key]


def _check_reps(reps: int) -> None:
    if reps < 1:
        raise DomainError(f'At least one replicate is required, got {reps}')


def _draw_responses(probs: npt.NDArray, rng: RngStream, replicate: int) -> npt.NDArray:
    return (rng.generator(replicate).random(probs.size) < probs).astype(np.int64)


def _run_replicates(worker: Callable[[int], R], reps: int, workers: int) -> list[R]:
    """Evaluates replicates 0..reps-1 in order; chunks may run on several threads without changing the result."""
    if workers <= 1:
        return [worker(r) for r in range(reps)]
    chunks = np.array_split(np.arange(reps), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda chunk: [worker(int(r)) for r in chunk], chunks))
    return [res for part in parts for res in part]


def sample_suffstats(X: npt.ArrayLike, beta: npt.ArrayLike, reps: int, rng: RngStream,
                     workers: int = 1) -> SuffStatSample:
    """
    Draws t_i ~ Bernoulli(p_i), p_i = s^-1(x_i^T beta), independently per replicate and records X^T t.

    Args:
        X: Design matrix.
        beta: Generating coefficients.
        reps: Number of replicates, >= 1.
        rng: Stream; replicate r uses rng.generator(r).
        workers: Number of threads.

    Returns:
        Sample of sufficient statistics with separation flags.
    """
    _check_reps(reps)
    X_arr = as_design(X)
    probs = expit(linear_predictor(X_arr, beta))
    template = Dataset(X_arr, np.zeros(X_arr.shape[0]))
    separated = _PatternCache(lambda t: detect_separation(template.with_response(t)) is not None)

    def worker(replicate: int) -> tuple[npt.NDArray, bool]:
        t = _draw_responses(probs, rng, replicate)
        return X_arr.T @ t, separated(t)

    results = _run_replicates(worker, reps, workers)
    draws = np.array([draw for draw, _ in results])
    flags = np.array([flag for _, flag in results], dtype=bool)
    logger.info('Sampled %d sufficient statistics, %d on the boundary', reps, int(flags.sum()))
    return SuffStatSample(draws=draws, on_boundary=flags, seed=rng.seed, stream_id=rng.stream_id)


def sample_mles(X: npt.ArrayLike, beta: npt.ArrayLike, reps: int, rng: RngStream, workers: int = 1) -> MleSample:
    """
    Refits the model on datasets drawn from the model at beta.

    Args:
        X: Design matrix.
        beta: Generating coefficients.
        reps: Number of replicates, >= 1.
        rng: Stream; replicate r uses rng.generator(r).
        workers: Number of threads.

    Returns:
        Interior estimates in replicate order, and boundary counts. Non-converged fits count as boundary and are
        tallied separately.
    """
    _check_reps(reps)
    X_arr = as_design(X)
    probs = expit(linear_predictor(X_arr, beta))
    template = Dataset(X_arr, np.zeros(X_arr.shape[0]))

    def fit_pattern(t: npt.NDArray) -> Optional[FitResult]:
        try:
            return fit_mle(template.with_response(t))
        except NoConvergence:
            logger.debug('Replicate pattern %s did not converge', t)
            return None

    fits = _PatternCache(fit_pattern)
    results = _run_replicates(lambda r: fits(_draw_responses(probs, rng, r)), reps, workers)

    estimates = [res.beta_hat for res in results if res is not None and not isinstance(res, BoundaryFit)]
    no_convergence = sum(res is None for res in results)
    boundary = sum(isinstance(res, BoundaryFit) for res in results) + no_convergence
    if no_convergence:
        logger.warning('%d of %d replicates did not converge and were counted as boundary', no_convergence, reps)
    interior = np.array(estimates).reshape(-1, X_arr.shape[1])
    return MleSample(interior_estimates=interior, boundary_count=boundary, total=reps,
                     no_convergence_count=no_convergence)


def exact_suffstat_distribution(X: npt.ArrayLike, beta: npt.ArrayLike) -> ExactDistribution:
    """
    Enumerates all 2^N response patterns (N <= 16) with their model probabilities and separation status, and
    aggregates them by the value of X^T t.

    Args:
        X: Design matrix.
        beta: Coefficients.

    Returns:
        Exact distribution of the sufficient statistic.
    """
    X_arr = as_design(X)
    probs = expit(linear_predictor(X_arr, beta))
    patterns = response_patterns(X_arr.shape[0])
    with np.errstate(divide='ignore'):
        log_p, log_q = np.log(probs), np.log1p(-probs)
    pattern_probs = np.exp(np.where(patterns == 1, log_p, 0.0).sum(axis=1) + np.where(patterns == 0, log_q, 0.0)
                           .sum(axis=1))
    template = Dataset(X_arr, np.zeros(X_arr.shape[0]))
    flags = np.array([detect_separation(template.with_response(t)) is not None for t in patterns], dtype=bool)
    values = patterns @ X_arr
    uniq, inverse = np.unique(np.round(values, 9), axis=0, return_inverse=True)
    inverse = inverse.ravel()
    agg_probs = np.bincount(inverse, weights=pattern_probs, minlength=len(uniq))
    agg_flags = np.zeros(len(uniq), dtype=bool)
    agg_flags[inverse[flags]] = True
    return ExactDistribution(values=uniq, probs=agg_probs, on_boundary=agg_flags)


def vertex_hits(sample: SuffStatSample, polytope: SuffStatPolytope, tolerance: float = 1e-9) -> npt.NDArray:
    """Number of sampled sufficient statistics coinciding with each polytope vertex."""
    dists = np.abs(sample.draws[:, np.newaxis, :] - polytope.vertices[np.newaxis, :, :]).max(axis=-1)
    return (dists <= tolerance).sum(axis=0)


def skewness(values: npt.ArrayLike) -> float:
    """
    Sample skewness m_3 / m_2^(3/2) with central moments m_r = mean((v - mean(v))^r).

    Args:
        values: At least 3 values.

    Returns:
        Skewness.

    Raises:
        DegenerateSample: Fewer than 3 values or variance below 1e-300.
    """
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size < 3:
        raise DegenerateSample(f'Skewness needs at least 3 values, got {arr.size}')
    if np.var(arr) < MIN_VARIANCE:
        raise DegenerateSample('Sample variance is zero')
    return float(stats.skew(arr, bias=True))


def _hermite_correction(y: npt.NDArray, kappa_std: npt.NDArray) -> npt.NDArray:
    """
    sum_abc kappa_abc He_abc(y) with He_abc(y) = y_a y_b y_c - y_a d_bc - y_b d_ac - y_c d_ab. For a symmetric
    tensor the three delta terms coincide.
    """
    cubic = np.einsum('abc,...a,...b,...c->...', kappa_std, y, y, y)
    trace = np.einsum('abb->a', kappa_std)
    return cubic - 3 * (y @ trace)


def edgeworth_density(z: npt.ArrayLike, m: ModelMoments) -> npt.NDArray | float:
    """
    First-order Edgeworth density: phi_Sigma(z - mu) [1 + (1/6) sum kappa^abc He_abc(y)], y = L^-1 (z - mu) with
    L the Cholesky factor of Sigma, kappa the third cumulants in standardized coordinates. Negative tail values
    are returned as is.

    Args:
        z: Point(s), shape (D,) or (..., D).
        m: Model moments.

    Returns:
        Density value(s).

    Raises:
        NotPositiveDefinite: Sigma is singular.
    """
    chol = cholesky(m.sigma)
    chol_inv = np.linalg.inv(chol)
    dim = chol.shape[0]
    z_arr = np.asarray(z, dtype=float)
    y = whiten(z_arr, np.asarray(m.mu, dtype=float), chol)
    kappa_std = np.einsum('abc,ia,jb,kc->ijk', np.asarray(m.kappa3, dtype=float), chol_inv, chol_inv, chol_inv)
    norm = np.exp(-0.5 * np.sum(y * y, axis=-1)) / ((2 * np.pi) ** (dim / 2) * np.prod(np.diag(chol)))
    res = norm * (1 + _hermite_correction(y, kappa_std) / 6)
    return float(res) if np.ndim(res) == 0 else res
