"""Geometry of the extended multinomial simplex: Fisher information, its spectrum, distances to faces."""
from dataclasses import dataclass
from dataclasses import field
from typing import Iterable

import numpy as np
import numpy.typing as npt

from .errors import DomainError
from .numerics import as_symmetric
from .numerics import sym_eigen

NORMALIZATION_TOLERANCE = 1e-12
TIE_TOLERANCE = 1e-12
FACE_INFINITY_TOLERANCE = 1e-14


class ProbabilityVector:
    """A point of the closed simplex. Zero cells are allowed."""

    def __init__(self, probs: npt.ArrayLike, reference: int = 0) -> None:
        """
        Args:
            probs: Cell probabilities (pi_0, ..., pi_k), k >= 1. Renormalized to sum 1.
            reference: Index of the omitted cell whose log-odds are the baseline.

        Raises:
            DomainError: Negative or non-finite entries, fewer than 2 cells, zero total mass, or a bad reference.
        """
        arr = np.array(probs, dtype=float).ravel()
        if arr.size < 2:
            raise DomainError('At least two cells are required')
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise DomainError('Cell probabilities must be finite and nonnegative')
        total = arr.sum()
        if total <= 0:
            raise DomainError('Cell probabilities must have positive total mass')
        if not 0 <= reference < arr.size:
            raise DomainError(f'Reference cell {reference} out of range')
        self.probs = arr / total
        self.probs.flags.writeable = False
        self.reference = reference
        self.k = arr.size - 1

    @property
    def others(self) -> npt.NDArray:
        """Indices of all cells except the reference, in order."""
        return np.delete(np.arange(self.k + 1), self.reference)

    @property
    def rest(self) -> npt.NDArray:
        """The sub-vector pi_(0) of all probabilities except the reference cell."""
        return self.probs[self.others]

    @property
    def is_interior(self) -> bool:
        return bool(np.all(self.probs > 0))

    def __repr__(self) -> str:
        return f'ProbabilityVector({np.array2string(self.probs, precision=6, separator=", ")}, ' \
               f'reference={self.reference})'


class FaceIndexSet:
    """A nonempty subset I of the non-reference cells, forced to zero on the face. I = {1..k} is the vertex pi_0 = 1."""

    def __init__(self, indices: Iterable[int]) -> None:
        self.indices = frozenset(int(i) for i in indices)
        if not self.indices:
            raise DomainError('Face index set must be nonempty')

    def check(self, pi: ProbabilityVector) -> None:
        """
        Raises:
            DomainError: The set contains the reference cell or unknown cells.
        """
        allowed = set(pi.others.tolist())
        if not self.indices <= allowed:
            raise DomainError(f'Face indices {sorted(self.indices - allowed)} are not non-reference cells')

    def __repr__(self) -> str:
        return f'FaceIndexSet({sorted(self.indices)})'


@dataclass(frozen=True)
class FisherSpectrum:
    """
    Spectrum of I(pi) split as in the interlacing theorem.

    The distinct positive non-reference probabilities lambda_1 > ... > lambda_g (multiplicities m_i) interlace with
    g simple eigenvalues: lambda_1 > simple_1 > ... > lambda_g > simple_g >= 0. Each lambda_i with m_i > 1 is
    also an eigenvalue of multiplicity m_i - 1. Zero cells add null_multiplicity zero eigenvalues.
    """

    simple_eigenvalues: tuple[float, ...]
    repeated_eigenvalues: tuple[tuple[float, int], ...]
    distinct_probs: tuple[tuple[float, int], ...]
    null_multiplicity: int = field(default=0)

    def eigenvalues(self) -> npt.NDArray:
        vals = list(self.simple_eigenvalues)
        for val, mult in self.repeated_eigenvalues:
            vals += [val] * mult
        vals += [0.0] * self.null_multiplicity
        return np.sort(np.array(vals))[::-1]

    def is_interlaced(self, tolerance: float = 1e-10) -> bool:
        chain = [val for pair in zip([lam for lam, _ in self.distinct_probs], self.simple_eigenvalues)
                 for val in pair]
        if not chain:
            return True
        return all(a - b > tolerance for a, b in zip(chain[:-1], chain[1:])) and chain[-1] >= -tolerance


def fisher_information(pi: ProbabilityVector) -> npt.NDArray:
    """
    Per-observation Fisher information for the natural (log-odds) parameters, diag(pi_(0)) - pi_(0) pi_(0)^T.

    Args:
        pi: Point of the simplex.

    Returns:
        Symmetric positive semidefinite k x k matrix, singular iff some cell is zero.
    """
    rest = pi.rest
    return as_symmetric(np.diag(rest) - np.outer(rest, rest))


def _group_distinct(values: npt.NDArray) -> list[tuple[float, int]]:
    """Groups values into (value, multiplicity), descending, treating relative differences <= 1e-12 as ties."""
    groups: list[tuple[float, int]] = []
    for val in np.sort(values)[::-1]:
        if groups and abs(groups[-1][0] - val) <= TIE_TOLERANCE * max(abs(groups[-1][0]), abs(val)):
            groups[-1] = (groups[-1][0], groups[-1][1] + 1)
        else:
            groups.append((float(val), 1))
    return groups


def fisher_spectrum(pi: ProbabilityVector) -> FisherSpectrum:
    """
    Computes the spectrum of I(pi) through its interlacing structure.

    Equal cells deflate: the distinct values lambda_i with multiplicity m_i give the repeated eigenvalues, and the
    simple ones are the eigenvalues of the g x g matrix diag(lambda) - w w^T, w_i = sqrt(m_i) lambda_i.

    Args:
        pi: Point of the simplex.

    Returns:
        The split spectrum.
    """
    rest = pi.rest
    positive = rest[rest > 0]
    null_multiplicity = int(rest.size - positive.size)
    groups = _group_distinct(positive)
    if not groups:
        return FisherSpectrum((), (), (), null_multiplicity)
    lams = np.array([lam for lam, _ in groups])
    mults = np.array([mult for _, mult in groups])
    w = np.sqrt(mults) * lams
    simple, _ = sym_eigen(np.diag(lams) - np.outer(w, w))
    simple = np.maximum(simple, 0.0)
    repeated = tuple((lam, mult - 1) for lam, mult in groups if mult > 1)
    return FisherSpectrum(tuple(float(v) for v in simple), repeated, tuple(groups), null_multiplicity)


def _require_interior(pi: ProbabilityVector) -> None:
    if not pi.is_interior:
        raise DomainError('Base point must be interior (all cells strictly positive)')


def fisher_quadratic(pi0: ProbabilityVector, pi: ProbabilityVector) -> float:
    """
    Squared distance from pi0 to pi measured by the Fisher information at pi0, in mean-parameter coordinates:
    sum_i (pi_i - pi0_i)^2 / pi0_i.

    Args:
        pi0: Interior base point.
        pi: Any point of the same simplex.

    Returns:
        Nonnegative squared distance.

    Raises:
        DomainError: pi0 is not interior or the sizes differ.
    """
    _require_interior(pi0)
    if pi.probs.size != pi0.probs.size:
        raise DomainError('Points belong to simplices of different dimension')
    diff = pi.probs - pi0.probs
    return float(np.sum(np.square(diff) / pi0.probs))


def face_distance_sq(pi0: ProbabilityVector, face: FaceIndexSet) -> float:
    """
    Squared Fisher-metric distance from an interior point to the face where the cells of I vanish:
    pi_I / (1 - pi_I), pi_I = sum of pi0 over I.

    Args:
        pi0: Interior base point.
        face: Cells forced to zero.

    Returns:
        Distance, +inf when pi_I >= 1 - 1e-14.

    Raises:
        DomainError: pi0 not interior or invalid face.
    """
    _require_interior(pi0)
    face.check(pi0)
    pi_face = float(pi0.probs[sorted(face.indices)].sum())
    if pi_face >= 1 - FACE_INFINITY_TOLERANCE:
        return float('inf')
    return pi_face / (1 - pi_face)


def nearest_face_point(pi0: ProbabilityVector, face: FaceIndexSet) -> ProbabilityVector:
    """The minimizer of fisher_quadratic over the face: pi0 rescaled off the face, zero on it."""
    _require_interior(pi0)
    face.check(pi0)
    probs = pi0.probs.copy()
    probs[sorted(face.indices)] = 0
    return ProbabilityVector(probs, reference=pi0.reference)
