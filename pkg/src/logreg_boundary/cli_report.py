"""Command-line front end: CSV ingestion, configuration, the fit / diagnostic / sampling pipeline and its output."""
import argparse
import configparser
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any
from typing import NoReturn
from typing import Optional
from typing import Sequence

import numpy as np
import numpy.typing as npt
import pandas as pd

from .boundary_polytope import SuffStatPolytope
from .diagnostics import boundary_diagnostic
from .diagnostics import contour_points
from .diagnostics import DEFAULT_LEVEL
from .diagnostics import DEFAULT_MARGINAL_FACTOR
from .diagnostics import DiagnosticReport
from .diagnostics import Status
from .errors import DegenerateSample
from .errors import EmptyFile
from .errors import InputError
from .errors import LogregBoundaryError
from .errors import MalformedCsv
from .errors import MissingColumn
from .errors import NonBinaryResponse
from .errors import NumericalError
from .errors import OutputError
from .errors import UsageError
from .logistic_model import center_covariates
from .logistic_model import Dataset
from .logistic_model import log_likelihood_grid
from .logistic_model import MAX_ITER
from .logistic_model import uncenter_beta
from .numerics import RngStream
from .sampling_lab import DEFAULT_REPS
from .sampling_lab import edgeworth_density
from .sampling_lab import exact_suffstat_distribution
from .sampling_lab import MleSample
from .sampling_lab import sample_mles
from .sampling_lab import sample_suffstats
from .sampling_lab import skewness
from .sampling_lab import SuffStatSample
from .sampling_lab import vertex_hits

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_GRID_RESOLUTION = 101
DEFAULT_GRID_HALF_WIDTH = 4.0
DEFAULT_CONTOUR_POINTS = 200
SAMPLE_STREAM_ID = 0
MLE_STREAM_ID = 1
FLOAT_FORMAT = '%.17g'
EXACT_PROBABILITY_MAX_N = 12

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_NUMERICAL_ERROR = 3

REPORT_SCHEMA: dict[str, Any] = {
    'schema_version': int,
    'status': str,
    'n_cases': int,
    'n_params': int,
    'level': float,
    'threshold': (float, str),
    'centered': bool,
    'offsets': list,
    'recession_direction': (list, type(None)),
    'verdict': (str, type(None)),
    'beta_hat': (list, type(None)),
    'beta_hat_uncentered': (list, type(None)),
    'mu_hat': (list, type(None)),
    'dist_sq': (float, str, type(None)),
    'boundary_contact': bool,
    'closest_face': (dict, type(None)),
    'polytope_vertices': (int, type(None)),
    'exact_boundary_probability': (float, type(None)),
    'sampling': (dict, type(None)),
}


@dataclass
class RunConfig:
    """Settings of one run. Field names double as long options and INI keys."""

    input_path: Path
    response_column: str
    covariate_columns: list[str]
    output_dir: Path
    center: bool = True
    level: float = DEFAULT_LEVEL
    reps: int = DEFAULT_REPS
    seed: int = 0
    grid_resolution: int = DEFAULT_GRID_RESOLUTION
    grid_half_width: float = DEFAULT_GRID_HALF_WIDTH
    marginal_factor: float = DEFAULT_MARGINAL_FACTOR
    workers: int = 1
    max_iter: int = MAX_ITER
    verbose: bool = False

    def __post_init__(self) -> None:
        self.input_path = Path(self.input_path)
        self.output_dir = Path(self.output_dir)
        if not 0 < self.level < 1:
            raise InputError(f'level must lie in (0, 1), got {self.level}')
        if self.reps < 0:
            raise InputError(f'reps must be >= 0, got {self.reps}')
        if not 0 <= self.seed < 2 ** 64:
            raise InputError(f'seed must be a 64-bit unsigned integer, got {self.seed}')
        if self.grid_resolution < 2:
            raise InputError(f'grid_resolution must be >= 2, got {self.grid_resolution}')
        if self.grid_half_width <= 0:
            raise InputError(f'grid_half_width must be positive, got {self.grid_half_width}')
        if self.marginal_factor < 1:
            raise InputError(f'marginal_factor must be >= 1, got {self.marginal_factor}')
        if self.max_iter < 1:
            raise InputError(f'max_iter must be >= 1, got {self.max_iter}')
        if self.workers < 1:
            raise InputError(f'workers must be >= 1, got {self.workers}')
        if not self.covariate_columns:
            raise InputError('At least one covariate column is required')


def _is_binary_token(token: str) -> Optional[int]:
    token = token.strip()
    if token in ('0', '1'):
        return int(token)
    try:
        val = float(token)
    except ValueError:
        return None
    return int(val) if val in (0.0, 1.0) else None


def parse_csv(path: Path | str, response_column: str, covariate_columns: Sequence[str]) -> Dataset:
    """
    Reads a UTF-8 CSV with a header row into a dataset whose design is an intercept column followed by the named
    covariates in order. Other columns are ignored.

    Args:
        path: CSV file.
        response_column: Name of the 0/1 response column.
        covariate_columns: Names of the covariate columns.

    Returns:
        Dataset.

    Raises:
        EmptyFile: No header or no data rows.
        MissingColumn: A named column is absent.
        NonBinaryResponse: A response is not 0/1.
        MalformedCsv: Unparsable file or non-numeric covariate.
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except pd.errors.EmptyDataError as exc:
        raise EmptyFile(f'{path} is empty') from exc
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise MalformedCsv(f'{path} cannot be parsed: {exc}') from exc
    except OSError as exc:
        raise InputError(f'{path} cannot be read: {exc}') from exc
    if frame.empty:
        raise EmptyFile(f'{path} has no data rows')
    frame.columns = [str(col).strip() for col in frame.columns]
    missing = [col for col in [response_column, *covariate_columns] if col not in frame.columns]
    if missing:
        raise MissingColumn(f'Columns not found in {path}: {", ".join(missing)}')

    responses = [_is_binary_token(token) for token in frame[response_column]]
    bad = [row for row, val in enumerate(responses) if val is None]
    if bad:
        raise NonBinaryResponse(f'Response "{frame[response_column].iloc[bad[0]]}" in data row {bad[0] + 1} '
                                f'is not 0 or 1')
    try:
        covariates = frame[list(covariate_columns)].apply(lambda col: col.str.strip().astype(float))
    except ValueError as exc:
        raise MalformedCsv(f'Non-numeric covariate value: {exc}') from exc
    X = np.column_stack((np.ones(len(frame)), covariates.to_numpy(dtype=float)))
    return Dataset(X, responses, intercept_column=0, column_names=['intercept', *covariate_columns])


def _num(val: float) -> float | str:
    """Finite numbers stay numbers; infinities become the strings "inf" / "-inf"."""
    val = float(val)
    if np.isfinite(val):
        return val
    return 'inf' if val > 0 else '-inf'


def _vec(arr: Optional[npt.NDArray]) -> Optional[list[float | str]]:
    return None if arr is None else [_num(v) for v in np.ravel(arr)]


def validate_report(report: dict[str, Any]) -> None:
    """
    Checks a report against REPORT_SCHEMA and that every number is finite.

    Raises:
        ValueError: Missing key, wrong type or non-finite number.
    """
    for key, kind in REPORT_SCHEMA.items():
        if key not in report:
            raise ValueError(f'report.json: missing key "{key}"')
        if not isinstance(report[key], kind):
            raise ValueError(f'report.json: key "{key}" has type {type(report[key]).__name__}')
    if report['schema_version'] != SCHEMA_VERSION:
        raise ValueError(f'report.json: unsupported schema version {report["schema_version"]}')

    def walk(node: Any) -> None:
        if isinstance(node, float) and not np.isfinite(node):
            raise ValueError('report.json: non-finite number')
        if isinstance(node, dict):
            for val in node.values():
                walk(val)
        if isinstance(node, list):
            for val in node:
                walk(val)

    walk(report)


def _sampling_section(suff: SuffStatSample, mles: MleSample, polytope: Optional[SuffStatPolytope],
                      slope_column: int) -> dict[str, Any]:
    section: dict[str, Any] = {
        'reps': mles.total,
        'seed': suff.seed,
        'suffstat_boundary_rate': _num(suff.boundary_rate),
        'mle_boundary_count': mles.boundary_count,
        'mle_no_convergence_count': mles.no_convergence_count,
        'boundary_hit_rate': _num(mles.boundary_rate),
        'beta_skewness': None,
        'vertex_hits': None,
    }
    if len(mles.interior_estimates) >= 3:
        try:
            section['beta_skewness'] = _num(skewness(mles.interior_estimates[:, slope_column]))
        except DegenerateSample:
            logger.warning('Slope estimates are degenerate; skewness not reported')
    if polytope is not None:
        section['vertex_hits'] = [int(v) for v in vertex_hits(suff, polytope)]
    return section


def build_report(config: RunConfig, d: Dataset, offsets: npt.NDArray, diag: DiagnosticReport,
                 sampling: Optional[dict[str, Any]], exact_prob: Optional[float]) -> dict[str, Any]:
    """Assembles the JSON-ready report."""
    face = diag.closest_face
    beta_unc = None
    if diag.beta_hat is not None and d.intercept_column is not None:
        beta_unc = uncenter_beta(diag.beta_hat, offsets, d.intercept_column)
    return {
        'schema_version': SCHEMA_VERSION,
        'status': diag.status.value,
        'n_cases': d.N,
        'n_params': d.D,
        'level': config.level,
        'threshold': _num(diag.threshold) if diag.threshold is not None else 'inf',
        'centered': config.center,
        'offsets': _vec(offsets),
        'recession_direction': _vec(diag.recession),
        'verdict': diag.verdict.value if diag.verdict is not None else None,
        'beta_hat': _vec(diag.beta_hat),
        'beta_hat_uncentered': _vec(beta_unc),
        'mu_hat': _vec(diag.mu_hat),
        'dist_sq': None if diag.dist_sq is None else _num(diag.dist_sq),
        'boundary_contact': diag.boundary_contact,
        'closest_face': None if face is None else {
            'edge': [int(face.edge[0]), int(face.edge[1])],
            'vertices': [_vec(face.edge_vertices[0]), _vec(face.edge_vertices[1])],
            'point': _vec(face.closest),
            'lambda': _num(face.lam),
        },
        'polytope_vertices': None if diag.polytope is None else int(len(diag.polytope.vertices)),
        'exact_boundary_probability': exact_prob,
        'sampling': sampling,
    }


def _write_csv(path: Path, columns: dict[str, npt.ArrayLike]) -> None:
    pd.DataFrame(columns).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')


def _edgeworth_grid(diag: DiagnosticReport, resolution: int, half_width: float) -> dict[str, npt.NDArray]:
    moments = diag.moments
    assert moments is not None
    sd = np.sqrt(np.diag(moments.sigma))
    axes = [np.linspace(m - half_width * s, m + half_width * s, resolution) for m, s in zip(moments.mu, sd)]
    grid = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1)
    dens = edgeworth_density(grid, moments)
    return {'x': grid[..., 0].ravel(), 'y': grid[..., 1].ravel(), 'density': np.ravel(dens)}


def run(config: RunConfig) -> int:
    """
    Runs the pipeline and writes report.json and the plot-data CSV files into config.output_dir.

    Args:
        config: Run settings.

    Returns:
        Exit code: 0 on a produced verdict (separated included), 2 on input errors, 3 on numerical failures.
    """
    try:
        return _run(config)
    except InputError as exc:
        print(f'error: {exc.one_line()}', file=sys.stderr)
        return EXIT_INPUT_ERROR
    except NumericalError as exc:
        print(f'error: {exc.one_line()}', file=sys.stderr)
        return EXIT_NUMERICAL_ERROR


def _run(config: RunConfig) -> int:
    raw = parse_csv(config.input_path, config.response_column, config.covariate_columns)
    logger.info('Loaded %s:\n%s', config.input_path, raw)
    d, offsets = center_covariates(raw) if config.center else (raw, np.zeros(raw.D))
    diag = boundary_diagnostic(d, config.level, config.marginal_factor, config.max_iter)

    exact_prob = None
    files: dict[str, dict[str, npt.ArrayLike]] = {}
    if diag.polytope is not None and d.D == 2:
        closed = diag.polytope.closed_vertices()
        files['polytope.csv'] = {'x': closed[:, 0], 'y': closed[:, 1]}

    sampling = None
    if diag.status is Status.EVALUATED and diag.beta_hat is not None:
        if d.N <= EXACT_PROBABILITY_MAX_N:
            exact_prob = float(exact_suffstat_distribution(d.X, diag.beta_hat).boundary_probability)
        if d.D == 2:
            assert diag.threshold is not None and diag.mu_hat is not None and diag.sigma_hat is not None
            contour = contour_points(diag.mu_hat, np.linalg.inv(diag.sigma_hat), diag.threshold,
                                     DEFAULT_CONTOUR_POINTS)
            files['contour.csv'] = {'x': contour[:, 0], 'y': contour[:, 1]}
            files['edgeworth_grid.csv'] = _edgeworth_grid(diag, config.grid_resolution, config.grid_half_width)
            se = np.sqrt(np.diag(np.linalg.inv(diag.sigma_hat)))
            alphas, betas, values = log_likelihood_grid(d, diag.beta_hat, config.grid_half_width * se,
                                                        config.grid_resolution)
            grid_a, grid_b = np.meshgrid(alphas, betas, indexing='ij')
            files['loglik_grid.csv'] = {'alpha': grid_a.ravel(), 'beta': grid_b.ravel(), 'loglik': values.ravel()}
        if config.reps > 0:
            suff = sample_suffstats(d.X, diag.beta_hat, config.reps, RngStream(config.seed, SAMPLE_STREAM_ID),
                                    config.workers)
            mles = sample_mles(d.X, diag.beta_hat, config.reps, RngStream(config.seed, MLE_STREAM_ID),
                               config.workers)
            slope = d.D - 1
            sampling = _sampling_section(suff, mles, diag.polytope if d.D == 2 else None, slope)
            if d.D == 2:
                files['suffstat_samples.csv'] = {'x': suff.draws[:, 0], 'y': suff.draws[:, 1],
                                                 'on_boundary': suff.on_boundary.astype(int)}
                files['mle_samples.csv'] = {'alpha': mles.interior_estimates[:, 0],
                                            'beta': mles.interior_estimates[:, 1]}

    report = build_report(config, d, offsets, diag, sampling, exact_prob)
    validate_report(report)

    try:
        config.output_dir.mkdir(parents=True, exist_ok=True)
        (config.output_dir / 'report.json').write_text(json.dumps(report, indent=2) + '\n', encoding='utf-8')
        for name, columns in files.items():
            _write_csv(config.output_dir / name, columns)
    except OSError as exc:
        raise OutputError(f'Cannot write to {config.output_dir}: {exc}') from exc
    logger.info('Wrote report.json and %d plot-data files to %s', len(files), config.output_dir)
    print(diag)
    return EXIT_OK


def _parse_bool(val: str) -> bool:
    low = val.strip().lower()
    if low in ('1', 'true', 'yes', 'on'):
        return True
    if low in ('0', 'false', 'no', 'off'):
        return False
    raise InputError(f'Not a boolean: {val}')


def _read_config_file(path: Path) -> dict[str, str]:
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding='utf-8') as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise InputError(f'Cannot read config file {path}: {exc}') from exc
    return dict(parser['run']) if parser.has_section('run') else {}


class _ArgumentParser(argparse.ArgumentParser):
    """Reports malformed command lines as UsageError instead of printing usage and exiting."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog='logreg_boundary',
                             description='Boundary-proximity diagnostic for logistic regression fits.')
    parser.add_argument('--config', type=Path, help='INI file with a [run] section; command line takes precedence')
    parser.add_argument('--input-path', type=Path)
    parser.add_argument('--response-column')
    parser.add_argument('--covariate-columns', nargs='+')
    parser.add_argument('--output-dir', type=Path)
    parser.add_argument('--center', dest='center', action='store_true', default=None)
    parser.add_argument('--no-center', dest='center', action='store_false')
    parser.add_argument('--level', type=float)
    parser.add_argument('--reps', type=int)
    parser.add_argument('--seed', type=int)
    parser.add_argument('--grid-resolution', type=int)
    parser.add_argument('--grid-half-width', type=float)
    parser.add_argument('--marginal-factor', type=float)
    parser.add_argument('--workers', type=int)
    parser.add_argument('--max-iter', type=int)
    parser.add_argument('--verbose', action='store_true', default=None)
    return parser


def config_from_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """
    Merges the optional INI file with the command line into a RunConfig.

    Raises:
        InputError: Missing required settings or invalid values.
    """
    args = vars(build_parser().parse_args(argv))
    config_path = args.pop('config')
    settings: dict[str, Any] = {}
    if config_path is not None:
        settings.update(_read_config_file(config_path))
        logger.debug('Settings read from %s', config_path)
    settings.update({key: val for key, val in args.items() if val is not None})

    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    unknown = set(settings) - set(fields)
    if unknown:
        raise InputError(f'Unknown settings: {", ".join(sorted(unknown))}')
    missing = [name for name, f in fields.items()
               if f.default is dataclasses.MISSING and name not in settings]
    if missing:
        raise InputError(f'Missing required settings: {", ".join(missing)}')
    converters = {'center': _parse_bool, 'verbose': _parse_bool, 'level': float, 'reps': int, 'seed': int,
                  'grid_resolution': int, 'grid_half_width': float, 'marginal_factor': float, 'workers': int,
                  'max_iter': int, 'covariate_columns': lambda val: val.split(',') if isinstance(val, str) else val}
    kwargs: dict[str, Any] = {}
    for key, val in settings.items():
        if isinstance(val, str) and key in converters:
            try:
                val = converters[key](val)
            except ValueError as exc:
                raise InputError(f'Invalid value for {key}: {val}') from exc
        kwargs[key] = val
    kwargs['covariate_columns'] = [col.strip() for col in kwargs['covariate_columns'] if col.strip()]
    return RunConfig(**kwargs)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = config_from_args(argv)
    except LogregBoundaryError as exc:
        print(f'error: {exc.one_line()}', file=sys.stderr)
        return EXIT_INPUT_ERROR
    logging.basicConfig(level=logging.DEBUG if config.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    return run(config)
