"""Inference for the common coefficient of variation of several normal populations.

The model takes group ``i`` to be ``N(mu_i, (tau * mu_i) ** 2)``.  Intervals
and tests for ``tau`` come from a modified signed log-likelihood ratio
(third-order accurate) and from three generalized pivotal quantities.
"""

from .errors import CVInferError, DataError, NumericalError
from .model import (Dataset, FitResult, ParamVector, SampleSummary, cmle_mu, constrained_theta,
                    fit_mle, log_likelihood, observed_info, profile_loglik, score, summarize)
from .interval import IntervalEstimate
from .mslr import ci_mslr, ci_slr, pvalue_mslr, pvalue_slr, q_statistic, r_star, slr_r
from .gpv import GV1Variant, PivotalConfig, gpv_ci, gpv_cis, gpv_pvalue, pivotal_samples
from .sim import SimScenario, builtin_scenarios, emit_table, load_scenarios, run_study
from . import datasets

__all__ = [
    "CVInferError", "DataError", "NumericalError",
    "Dataset", "FitResult", "ParamVector", "SampleSummary", "cmle_mu", "constrained_theta",
    "fit_mle", "log_likelihood", "observed_info", "profile_loglik", "score", "summarize",
    "IntervalEstimate",
    "ci_mslr", "ci_slr", "pvalue_mslr", "pvalue_slr", "q_statistic", "r_star", "slr_r",
    "GV1Variant", "PivotalConfig", "gpv_ci", "gpv_cis", "gpv_pvalue", "pivotal_samples",
    "SimScenario", "builtin_scenarios", "emit_table", "load_scenarios", "run_study",
    "datasets",
]
