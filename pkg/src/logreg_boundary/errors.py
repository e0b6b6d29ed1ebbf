from typing import Any

import numpy as np


class LogregBoundaryError(Exception):
    """Base class. Every error carries a short machine-parsable code."""

    code = 'error'

    def __init__(self, message: str, **payload: Any) -> None:
        super().__init__(message)
        self.payload = payload

    def one_line(self) -> str:
        return f'{self.code}: {self}'.replace('\n', ' ')


class InputError(LogregBoundaryError, ValueError):
    """Invalid input data or configuration."""

    code = 'input_error'


class NumericalError(LogregBoundaryError, ArithmeticError):
    """Internal numerical failure."""

    code = 'numerical_error'


class DomainError(InputError):
    code = 'domain_error'


class DimensionError(InputError):
    code = 'dimension_error'


class UnsupportedDimension(DimensionError):
    code = 'unsupported_dimension'


class MissingColumn(InputError):
    code = 'missing_column'


class NonBinaryResponse(InputError):
    code = 'non_binary_response'


class EmptyFile(InputError):
    code = 'empty_file'


class MalformedCsv(InputError):
    code = 'malformed_csv'


class RankDeficient(InputError):
    code = 'rank_deficient'


class NoInterceptColumn(InputError):
    code = 'no_intercept_column'


class DegenerateSample(InputError):
    code = 'degenerate_sample'


class CenterOutside(InputError):
    """The center lies on or outside the polygon. Payload: dist_sq (always 0) and the violated edge."""

    code = 'center_outside'


class NotPositiveDefinite(NumericalError, np.linalg.LinAlgError):
    code = 'not_positive_definite'


class NoConvergence(NumericalError, RuntimeError):
    """Newton iterations exhausted. Payload: beta (last iterate), score_norm, iterations."""

    code = 'no_convergence'


class UsageError(InputError):
    """Malformed command line."""

    code = 'usage_error'


class OutputError(InputError):
    """The output directory or one of its files cannot be written."""

    code = 'output_error'
