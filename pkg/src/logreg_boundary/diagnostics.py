"""
Boundary-proximity diagnostic: does the chi-square calibrated Fisher-metric contour around the fitted mean
parameter cross the polytope of attainable sufficient statistics?
"""
import logging
from dataclasses import dataclass
from dataclasses import field
from enum import Enum
from typing import Optional

import numpy as np
import numpy.typing as npt

from .boundary_polytope import BoundaryDistance
from .boundary_polytope import min_mahalanobis_to_polytope_boundary
from .boundary_polytope import suffstat_polytope_2d
from .boundary_polytope import SuffStatPolytope
from .errors import CenterOutside
from .errors import DomainError
from .errors import UnsupportedDimension
from .helpers import format_attrs
from .helpers import indentate
from .logistic_model import BoundaryFit
from .logistic_model import Dataset
from .logistic_model import fit_mle
from .logistic_model import MAX_ITER
from .logistic_model import model_moments
from .logistic_model import ModelMoments
from .numerics import as_symmetric
from .numerics import chi2_quantile
from .numerics import cholesky
from .transforms import circle_points

logger = logging.getLogger(__name__)

DEFAULT_LEVEL = 0.99
DEFAULT_MARGINAL_FACTOR = 1.5


class Status(Enum):
    SEPARATED = 'separated'
    EVALUATED = 'evaluated'


class Verdict(Enum):
    SAFE = 'SAFE'
    MARGINAL = 'MARGINAL'
    SUSPECT = 'SUSPECT'

    @property
    def severity(self) -> int:
        return [Verdict.SAFE, Verdict.MARGINAL, Verdict.SUSPECT].index(self)


@dataclass(frozen=True)
class DiagnosticReport:
    """Outcome of the boundary diagnostic. Evaluated-only fields are None for separated data."""

    status: Status
    level: float
    D: int
    recession: Optional[npt.NDArray] = None
    beta_hat: Optional[npt.NDArray] = None
    mu_hat: Optional[npt.NDArray] = None
    sigma_hat: Optional[npt.NDArray] = None
    dist_sq: Optional[float] = None
    threshold: Optional[float] = None
    verdict: Optional[Verdict] = None
    closest_face: Optional[BoundaryDistance] = None
    boundary_contact: bool = False
    polytope: Optional[SuffStatPolytope] = field(default=None, repr=False)
    moments: Optional[ModelMoments] = field(default=None, repr=False)

    @property
    def severity(self) -> int:
        """0 SAFE, 1 MARGINAL, 2 SUSPECT, 3 separated."""
        return 3 if self.status is Status.SEPARATED else self.verdict.severity  # type: ignore[union-attr]

    def __str__(self) -> str:
        if self.status is Status.SEPARATED:
            return f'Status: separated\nRecession direction: {self.recession}'
        attrs = [('level', ''), ('threshold', ''), ('dist_sq', ''), ('beta_hat', ''), ('mu_hat', '')]
        table = format_attrs(self, attrs, [('_', ' '), ('dist sq', 'squared distance'),
                                           ('threshold', 'chi2 threshold')])
        face = self.closest_face
        face_str = '' if face is None else f'\nClosest boundary point:\n{indentate(str(face.closest))}'
        return f'Verdict: {self.verdict.value}\n{table}{face_str}'  # type: ignore[union-attr]


def classify(dist_sq: float, threshold: float, marginal_factor: float = DEFAULT_MARGINAL_FACTOR) -> Verdict:
    if dist_sq < threshold:
        return Verdict.SUSPECT
    if dist_sq < marginal_factor * threshold:
        return Verdict.MARGINAL
    return Verdict.SAFE


def interval_polytope(x: npt.NDArray) -> SuffStatPolytope:
    """Attainable range [sum min(0, x_i), sum max(0, x_i)] of x^T t for a single column."""
    low_pattern = (x < 0).astype(np.int64)
    high_pattern = (x > 0).astype(np.int64)
    patterns = np.vstack((low_pattern, high_pattern))
    return SuffStatPolytope(vertices=(patterns @ x)[:, np.newaxis], vertex_patterns=patterns)


def _interval_distance(polytope: SuffStatPolytope, center: float, variance: float) -> BoundaryDistance:
    low, high = polytope.vertices[:, 0]
    if not low < center < high:
        raise CenterOutside(f'Center {center} is not strictly inside [{low}, {high}]', dist_sq=0.0, edge=(0, 1))
    end = 0 if center - low <= high - center else 1
    closest = polytope.vertices[end]
    dist_sq = float((closest[0] - center) ** 2 / variance)
    return BoundaryDistance(dist_sq=dist_sq, closest=closest, edge=(end, end),
                            edge_vertices=(closest, closest), lam=0.0)


def boundary_diagnostic(d: Dataset, level: float = DEFAULT_LEVEL, marginal_factor: float = DEFAULT_MARGINAL_FACTOR,
                        max_iter: int = MAX_ITER) -> DiagnosticReport:
    """
    Fits the model and measures the squared Mahalanobis distance, metric Sigma^-1 at the MLE, from the fitted
    mean parameter mu = X^T p to the boundary of the attainable sufficient statistics; compares it with the
    chi-square(D) quantile at the given level.

    Args:
        d: Dataset with D = 1 or D = 2 columns.
        level: Calibration probability.
        marginal_factor: Upper end of the MARGINAL band as a multiple of the threshold.
        max_iter: Newton step limit of the fit.

    Returns:
        The report; separated data give status SEPARATED.

    Raises:
        UnsupportedDimension: D > 2.
        DomainError: Level or marginal factor out of range.
        NoConvergence: The fit did not converge within max_iter steps.
    """
    if d.D > 2:
        raise UnsupportedDimension(f'Polytope-based verdicts are supported for D <= 2, got D = {d.D}')
    if marginal_factor < 1:
        raise DomainError(f'Marginal factor must be >= 1, got {marginal_factor}')
    threshold = chi2_quantile(d.D, level)

    fit = fit_mle(d, max_iter=max_iter)
    if isinstance(fit, BoundaryFit):
        logger.info('Data are separated; recession direction %s', fit.recession)
        return DiagnosticReport(status=Status.SEPARATED, level=level, D=d.D, recession=fit.recession,
                                threshold=threshold)

    moments = model_moments(d.X, fit.beta_hat)
    polytope = interval_polytope(d.X[:, 0]) if d.D == 1 else suffstat_polytope_2d(d.X)
    contact = False
    try:
        if d.D == 1:
            face = _interval_distance(polytope, float(moments.mu[0]), float(moments.sigma[0, 0]))
        else:
            metric = np.linalg.inv(moments.sigma)
            face = min_mahalanobis_to_polytope_boundary(polytope, moments.mu, metric)
        dist_sq = face.dist_sq
    except CenterOutside as exc:
        logger.warning('Fitted mean parameter touches the boundary (edge %s)', exc.payload.get('edge'))
        contact, face, dist_sq = True, None, 0.0
    verdict = classify(dist_sq, threshold, marginal_factor)
    logger.info('Diagnostic: dist_sq=%.6g threshold=%.6g verdict=%s', dist_sq, threshold, verdict.value)
    return DiagnosticReport(status=Status.EVALUATED, level=level, D=d.D, beta_hat=fit.beta_hat, mu_hat=moments.mu,
                            sigma_hat=moments.sigma, dist_sq=dist_sq, threshold=threshold, verdict=verdict,
                            closest_face=face, boundary_contact=contact, polytope=polytope, moments=moments)


def contour_points(mu: npt.ArrayLike, metric: npt.ArrayLike, radius_sq: float, n: int) -> npt.NDArray:
    """
    Points on the ellipse (z - mu)^T M (z - mu) = radius_sq, equally spaced in the whitened angle.

    Args:
        mu: Center, 2-vector.
        metric: Positive definite 2 x 2 matrix M.
        radius_sq: Squared radius, >= 0.
        n: Number of points, >= 3.

    Returns:
        n x 2 array of points.

    Raises:
        NotPositiveDefinite: M is not positive definite.
        DomainError: n < 3 or negative radius.
    """
    if n < 3:
        raise DomainError(f'At least 3 contour points are required, got {n}')
    if radius_sq < 0:
        raise DomainError(f'Squared radius must be nonnegative, got {radius_sq}')
    chol = cholesky(as_symmetric(metric))
    circle = circle_points(n, np.sqrt(radius_sq))
    # M = L L^T, so z - mu = L^-T u maps the circle |u|^2 = r onto the ellipse
    offsets = np.linalg.solve(chol.T, circle.T).T
    return np.asarray(mu, dtype=float) + offsets
