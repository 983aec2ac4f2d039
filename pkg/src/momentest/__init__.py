"""Distribution estimation for unbounded probabilistic loops.

Pipeline: parse a loop program, compute exact raw moments of a variable at a
concrete iteration (or ingest them), fit maximum-entropy and Gaussian-series
density estimates from those moments, and assess the fits against sampled
executions with chi-square and Kolmogorov-Smirnov tests.
"""

from .dsl import CoreProgram, Program, desugar, parse_program, pretty_print, validate
from .engine import SampleData, empirical_moments, run_once, sample
from .errors import MomentestError
from .estimate import (
    DensityEstimate,
    FitDiagnostics,
    cdf_eval,
    entropy_of_estimate,
    fit_gram_charlier,
    fit_max_entropy,
    levenberg_marquardt,
    moment_of_estimate,
    pdf_eval,
)
from .gof import ErrorTable, TestResult, chi_square_test, error_report, kde, ks_test
from .moments import (
    MomentSet,
    MonomialBasis,
    closure_basis,
    load_moments,
    moment_validity,
    propagate,
    propagated_moments,
    raw_moment,
)
from .specfun import (
    CumulantVector,
    Quadrature,
    bell_reduced,
    chi2_inv_cdf,
    cumulants_from_moments,
    gauss_legendre,
    hermite_prob,
    moments_from_cumulants,
)

__version__ = "0.1.0"

__all__ = [
    "CoreProgram",
    "CumulantVector",
    "DensityEstimate",
    "ErrorTable",
    "FitDiagnostics",
    "MomentSet",
    "MomentestError",
    "MonomialBasis",
    "Program",
    "Quadrature",
    "SampleData",
    "TestResult",
    "bell_reduced",
    "cdf_eval",
    "chi2_inv_cdf",
    "chi_square_test",
    "closure_basis",
    "cumulants_from_moments",
    "desugar",
    "empirical_moments",
    "entropy_of_estimate",
    "error_report",
    "fit_gram_charlier",
    "fit_max_entropy",
    "gauss_legendre",
    "hermite_prob",
    "kde",
    "ks_test",
    "levenberg_marquardt",
    "load_moments",
    "moment_of_estimate",
    "moment_validity",
    "moments_from_cumulants",
    "parse_program",
    "pdf_eval",
    "pretty_print",
    "propagate",
    "propagated_moments",
    "raw_moment",
    "run_once",
    "sample",
    "validate",
]
