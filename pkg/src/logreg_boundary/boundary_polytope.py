"""
Boundary geometry: envelopes of line families (which simplex vertices a two-parameter family reaches) and the
polytope of attainable sufficient statistics for two-column designs.
"""
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
import numpy.typing as npt

from .errors import CenterOutside
from .errors import DimensionError
from .errors import DomainError
from .geometry import cross2
from .geometry import is_collinear
from .geometry import lineline_intersec
from .geometry import point_on_segment
from .numerics import as_design
from .numerics import as_symmetric
from .numerics import cholesky
from .transforms import half_plane_angle

logger = logging.getLogger(__name__)

MAX_ENUMERATION_N = 16
CONVEXITY_TOLERANCE = 1e-9
INSIDE_TOLERANCE = 1e-12


class LineFamily:
    """Lines theta -> slope * theta + intercept, one per simplex cell."""

    def __init__(self, lines: npt.ArrayLike) -> None:
        """
        Args:
            lines: Sequence of (slope, intercept) pairs, at least 2.

        Raises:
            DomainError: Fewer than 2 lines or non-finite coefficients.
        """
        arr = np.array(lines, dtype=float, ndmin=2)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
            raise DomainError('A line family needs at least 2 (slope, intercept) pairs')
        if not np.all(np.isfinite(arr)):
            raise DomainError('Line coefficients must be finite')
        self.slopes = arr[:, 0]
        self.intercepts = arr[:, 1]

    def __len__(self) -> int:
        return self.slopes.size

    def values(self, theta: npt.ArrayLike) -> npt.NDArray:
        """Line values, shape (len(theta), number of lines)."""
        return np.outer(np.atleast_1d(theta), self.slopes) + self.intercepts


@dataclass(frozen=True)
class EnvelopeResult:
    """
    upper: (line index, (theta_from, theta_to)) pieces of the upper envelope, slopes increasing.
    lower: same for the lower envelope, slopes decreasing.
    redundant: lines on neither envelope.
    """

    upper: tuple[tuple[int, tuple[float, float]], ...]
    lower: tuple[tuple[int, tuple[float, float]], ...]
    redundant: frozenset[int]
    members: frozenset[int]


def _upper_hull(slopes: list[Fraction], intercepts: list[Fraction], order: list[int]) -> list[int]:
    """Convex hull trick over lines sorted by slope (ascending, distinct); returns the envelope lines in order."""
    hull: list[int] = []
    for idx in order:
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            # j survives only if it beats i and idx on an interval of positive length
            lhs = (intercepts[j] - intercepts[idx]) * (slopes[j] - slopes[i])
            rhs = (intercepts[i] - intercepts[j]) * (slopes[idx] - slopes[j])
            if lhs <= rhs:
                hull.pop()
            else:
                break
        hull.append(idx)
    return hull


def _envelope_side(slopes: npt.NDArray, intercepts: npt.NDArray) -> list[tuple[int, tuple[float, float]]]:
    exact_slopes = [Fraction(float(s)) for s in slopes]
    exact_intercepts = [Fraction(float(b)) for b in intercepts]
    best: dict[Fraction, int] = {}
    for idx, (s, b) in enumerate(zip(exact_slopes, exact_intercepts)):
        if s not in best or b > exact_intercepts[best[s]]:
            best[s] = idx
    order = [best[s] for s in sorted(best)]
    hull = _upper_hull(exact_slopes, exact_intercepts, order)
    bounds = [-np.inf] + [lineline_intersec(float(slopes[a]), float(intercepts[a]), float(slopes[b]),
                                            float(intercepts[b])) for a, b in zip(hull[:-1], hull[1:])] + [np.inf]
    return [(idx, (bounds[n], bounds[n + 1])) for n, idx in enumerate(hull)]


def _with_duplicates(pieces: list[tuple[int, tuple[float, float]]], slopes: npt.NDArray,
                     intercepts: npt.NDArray) -> set[int]:
    members = set()
    for idx, _ in pieces:
        same = np.nonzero((slopes == slopes[idx]) & (intercepts == intercepts[idx]))[0]
        members.update(int(i) for i in same)
    return members


def envelope_of_lines(f: LineFamily) -> EnvelopeResult:
    """
    Upper and lower envelopes of a line family. A line belongs to an envelope iff it attains the pointwise
    maximum (minimum) on a theta-interval of positive length; identical lines share membership. Membership is
    decided in exact rational arithmetic.

    Args:
        f: Line family.

    Returns:
        Envelope pieces with their theta-intervals and the redundant lines.
    """
    upper = _envelope_side(f.slopes, f.intercepts)
    lower_neg = _envelope_side(-f.slopes, -f.intercepts)
    members = _with_duplicates(upper, f.slopes, f.intercepts) | _with_duplicates(lower_neg, f.slopes, f.intercepts)
    redundant = frozenset(range(len(f))) - members
    logger.debug('Envelope: %d upper, %d lower pieces, %d redundant lines', len(upper), len(lower_neg),
                 len(redundant))
    return EnvelopeResult(upper=tuple(upper), lower=tuple(lower_neg), redundant=redundant,
                          members=frozenset(members))


def connected_vertices(f: LineFamily) -> set[int]:
    """Cells reached as limits of the two-parameter family: union of upper and lower envelope members."""
    return set(envelope_of_lines(f).members)


def response_patterns(n: int) -> npt.NDArray:
    """
    All 2^n binary response vectors, one per row, in lexicographic order.

    Raises:
        DimensionError: n above the enumeration limit.
    """
    if n > MAX_ENUMERATION_N:
        raise DimensionError(f'Enumeration of 2^{n} patterns is not supported (N <= {MAX_ENUMERATION_N})')
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64).reshape(-1, n)


def design_line_family(X: npt.ArrayLike) -> tuple[LineFamily, npt.NDArray]:
    """
    Line family of a two-column design: along alpha = theta * beta the log-probability of the response pattern z
    grows like beta * ((z^T x_0) theta + z^T x_1).

    Args:
        X: N x 2 design matrix, N <= 16.

    Returns:
        The family (one line per pattern) and the patterns as rows.

    Raises:
        DimensionError: X does not have 2 columns or N is too large.
    """
    X_arr = as_design(X)
    if X_arr.shape[1] != 2:
        raise DimensionError(f'Design must have 2 columns, got {X_arr.shape[1]}')
    patterns = response_patterns(X_arr.shape[0])
    stats = patterns @ X_arr
    return LineFamily(stats), patterns


@dataclass(frozen=True)
class SuffStatPolytope:
    """Counterclockwise vertices of conv{X^T t}, each with a response pattern attaining it."""

    vertices: npt.NDArray
    vertex_patterns: npt.NDArray

    @property
    def edges(self) -> list[tuple[int, int]]:
        n = len(self.vertices)
        return [(i, (i + 1) % n) for i in range(n)] if n > 1 else []

    def closed_vertices(self) -> npt.NDArray:
        """Vertex list with the first vertex repeated at the end."""
        return np.vstack((self.vertices, self.vertices[:1]))

    def is_convex(self, tolerance: float = CONVEXITY_TOLERANCE) -> bool:
        n = len(self.vertices)
        if n < 3:
            return True
        for i in range(n):
            prv, cur, nxt = self.vertices[i - 1], self.vertices[i], self.vertices[(i + 1) % n]
            if cross2(cur - prv, nxt - cur) <= tolerance:
                return False
        return True


def _merged_generators(X: npt.NDArray) -> tuple[list[npt.NDArray], list[list[int]], npt.NDArray]:
    """
    Folds every nonzero row into the upper half-plane, sorts by angle and merges collinear rows.

    Returns:
        Merged generators, the row indices behind each one, and the base pattern (1 for folded rows).
    """
    base = np.zeros(X.shape[0], dtype=np.int64)
    folded = []
    for i, row in enumerate(X):
        if not np.any(row):
            continue
        if row[1] < 0 or (row[1] == 0 and row[0] < 0):
            base[i] = 1
            row = -row
        folded.append((half_plane_angle(row), i, row))
    folded.sort(key=lambda item: (item[0], item[1]))

    generators: list[npt.NDArray] = []
    members: list[list[int]] = []
    for _, i, row in folded:
        if generators and is_collinear(generators[-1], row):
            generators[-1] = generators[-1] + row
            members[-1].append(i)
        else:
            generators.append(row.copy())
            members.append([i])
    return generators, members, base


def suffstat_polytope_2d(X: npt.ArrayLike) -> SuffStatPolytope:
    """
    Vertices of the zonotope sum_i [0, x_i] = conv{X^T t : t in {0,1}^N} for a two-column design.

    Generators are folded into the upper half-plane, sorted by angle and merged when collinear. The walk starts
    at the lowest corner, adds the generators in angle order, then removes them in the same order; every step
    flips the pattern entries of the rows behind one generator. Zero rows never move the hull and are skipped.

    Args:
        X: N x 2 design matrix.

    Returns:
        The polytope; vertex coordinates are evaluated as X^T pattern.

    Raises:
        DimensionError: X does not have 2 columns.
    """
    X_arr = as_design(X)
    if X_arr.ndim != 2 or X_arr.shape[1] != 2:
        raise DimensionError(f'Polytope path needs D = 2, got shape {X_arr.shape}')
    generators, members, base = _merged_generators(X_arr)

    patterns = [base.copy()]
    current = base.copy()
    for _ in range(2):
        for rows in members:
            current[rows] = 1 - current[rows]
            patterns.append(current.copy())
    patterns = patterns[:-1] if len(patterns) > 1 else patterns
    pattern_arr = np.array(patterns, dtype=np.int64)
    vertices = pattern_arr @ X_arr
    logger.debug('Polytope: %d generators, %d vertices', len(generators), len(vertices))
    return SuffStatPolytope(vertices=vertices, vertex_patterns=pattern_arr)


@dataclass(frozen=True)
class BoundaryDistance:
    """Closest boundary point of a polygon in a quadratic metric."""

    dist_sq: float
    closest: npt.NDArray
    edge: tuple[int, int]
    edge_vertices: tuple[npt.NDArray, npt.NDArray]
    lam: float


def violated_edge(p: SuffStatPolytope, center: npt.NDArray) -> Optional[tuple[int, int]]:
    """The first edge that does not have the center strictly on its left, or None if the center is inside."""
    if len(p.vertices) < 3:
        return p.edges[0] if p.edges else (0, 0)
    for a, b in p.edges:
        seg = p.vertices[b] - p.vertices[a]
        rel = center - p.vertices[a]
        scale = np.linalg.norm(seg) * (np.linalg.norm(rel) + 1)
        if cross2(seg, rel) <= INSIDE_TOLERANCE * scale:
            return a, b
    return None


def min_mahalanobis_to_polytope_boundary(p: SuffStatPolytope, center: npt.ArrayLike,
                                         metric: npt.ArrayLike) -> BoundaryDistance:
    """
    Minimum over the edges of (v - center)^T M (v - center), v on the edge.

    Each edge v_a + lam (v_b - v_a) is a one-dimensional quadratic in lam, minimized in closed form and clamped
    to [0, 1].

    Args:
        p: Polygon with counterclockwise vertices.
        center: Strictly interior point.
        metric: Positive definite 2 x 2 matrix M.

    Returns:
        The global minimizer with its edge and parameter.

    Raises:
        CenterOutside: The center is on or outside the boundary (payload dist_sq = 0 and the violated edge).
        NotPositiveDefinite: The metric is not positive definite.
    """
    ctr = np.asarray(center, dtype=float)
    mat = as_symmetric(metric)
    cholesky(mat)
    bad = violated_edge(p, ctr)
    if bad is not None:
        raise CenterOutside(f'Center {ctr} is not strictly inside the polytope (edge {bad})', dist_sq=0.0, edge=bad)

    best: Optional[BoundaryDistance] = None
    for a, b in p.edges:
        v_a, v_b = p.vertices[a], p.vertices[b]
        seg = v_b - v_a
        rel = v_a - ctr
        curv = float(seg @ mat @ seg)
        lam = float(np.clip(-(seg @ mat @ rel) / curv, 0.0, 1.0))
        closest = point_on_segment(v_a, v_b, lam)
        diff = closest - ctr
        dist_sq = float(diff @ mat @ diff)
        if best is None or dist_sq < best.dist_sq:
            best = BoundaryDistance(dist_sq=dist_sq, closest=closest, edge=(a, b), edge_vertices=(v_a, v_b),
                                    lam=lam)
    assert best is not None
    return best
