"""Tetrad-differencing conditional logit estimation for ordered directed networks."""

from .clogit import FitResult, LogitProblem, fit
from .dataio import DatasetBundle, Recipe, export_network, ingest
from .errors import TetradLogitError
from .estimators import EstimatorSpec, estimate, identification_diagnostics
from .inference import naive_vcov, robust_vcov, robust_vcov_for, wald_table
from .network import OrderedNetwork, binarize, degree_summary
from .simlab import DgpConfig, Homogeneous, SenderHeterogeneous, TypeHeterogeneous, draw_network, run_mc
from .tetrads import canonical_tetrads, count_tetrads, extract_informative

__all__ = [
    "DatasetBundle", "DgpConfig", "EstimatorSpec", "FitResult", "Homogeneous", "LogitProblem",
    "OrderedNetwork", "Recipe", "SenderHeterogeneous", "TetradLogitError", "TypeHeterogeneous",
    "binarize", "canonical_tetrads", "count_tetrads", "degree_summary", "draw_network", "estimate",
    "export_network", "extract_informative", "fit", "identification_diagnostics", "ingest",
    "naive_vcov", "robust_vcov", "robust_vcov_for", "run_mc", "wald_table",
]
