from .boundary_polytope import connected_vertices
from .boundary_polytope import design_line_family
from .boundary_polytope import envelope_of_lines
from .boundary_polytope import LineFamily
from .boundary_polytope import min_mahalanobis_to_polytope_boundary
from .boundary_polytope import suffstat_polytope_2d
from .cli_report import main
from .cli_report import parse_csv
from .cli_report import run
from .cli_report import RunConfig
from .diagnostics import boundary_diagnostic
from .diagnostics import DiagnosticReport
from .diagnostics import Verdict
from .helpers import bool_to_sign
from .logistic_model import Dataset
from .logistic_model import detect_separation
from .logistic_model import fit_mle
from .logistic_model import model_moments
from .multinomial_geometry import face_distance_sq
from .multinomial_geometry import fisher_spectrum
from .multinomial_geometry import ProbabilityVector
from .numerics import RngStream
from .sampling_lab import edgeworth_density
from .sampling_lab import sample_mles
from .sampling_lab import sample_suffstats
from .sampling_lab import skewness
