"""Zeros of high-degree polynomials: root finding, clustering certificates, experiments."""

__version__ = "0.1.0"

from .bounds import (
    ClusterCertificate,
    DiscrepancyRecord,
    LogHeight,
    certify_all,
    certify_annulus,
    certify_sector,
    jensen_residual,
    log_height,
    minorization_check,
)
from .counting import AnnulusCount, SectorCount, count_annulus, count_sector
from .experiments import (
    ExperimentConfig,
    ExperimentResult,
    alpha_of,
    emit_report,
    exhaustive_expectation,
    run_experiment,
)
from .poly import Polynomial, coefficient_l1, evaluate, make_polynomial, reverse
from .rootfind import RootSet, SolveOptions, certify_roots, find_roots
from .samplers import (
    CauchyScaled,
    CommonScale,
    IIDGeneric,
    PositiveCauchy,
    Rademacher,
    SignedUniformInt,
    cauchy_fractional_moment,
    concavity_bound_check,
    moment_diagnostics,
    sample_polynomial,
)
