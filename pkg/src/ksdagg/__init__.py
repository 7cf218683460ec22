"""Aggregated kernel Stein discrepancy goodness-of-fit testing.

Given a model known through its score function and samples from an
unknown distribution, the tests here decide whether the samples are
compatible with the model. The headline procedure aggregates fixed-kernel
tests over a bandwidth collection with a bisection-calibrated level
correction, avoiding both bandwidth heuristics and data splitting.
"""

from .aggregation import AggConfig, KernelResult, TestReport, compute_u_alpha, ksdagg_test, single_test
from .baselines import median_test, power_proxy, select_bandwidth_by_proxy, split_test
from .bootstrap import (
    BootstrapBank,
    empirical_quantile,
    parametric_bootstrap_stat,
    wild_bootstrap_stat,
    wild_bootstrap_stats,
)
from .estimators import KSDAgg, MedianKSD, SplitKSD
from .exceptions import (
    CapabilityError,
    ConfigError,
    DataError,
    DegenerateDataError,
    KsdaggError,
    ModelEvaluationError,
)
from .kernels import (
    BandwidthCollection,
    KernelSpec,
    collection_from_bandwidths,
    geometric_collection,
    kernel_value,
    median_bandwidth,
    pairwise_sq_dists,
    power_of_two_collection,
)
from .models import GammaModel, GaussianModel, RbmModel, ScoreModel, make_random_rbm, perturb_rbm, standard_normal_model
from .rng import RngStream
from .stein import (
    kernel_partials,
    ksd_ustat,
    stein_gram,
    stein_gram_collection,
    stein_kernel_entry,
    stein_pair_values,
    stein_ustats,
)

__version__ = "0.1.0"

__all__ = [
    "AggConfig",
    "BandwidthCollection",
    "BootstrapBank",
    "CapabilityError",
    "ConfigError",
    "DataError",
    "DegenerateDataError",
    "GammaModel",
    "GaussianModel",
    "KSDAgg",
    "KernelResult",
    "KernelSpec",
    "KsdaggError",
    "MedianKSD",
    "ModelEvaluationError",
    "RbmModel",
    "RngStream",
    "ScoreModel",
    "SplitKSD",
    "TestReport",
    "collection_from_bandwidths",
    "compute_u_alpha",
    "empirical_quantile",
    "geometric_collection",
    "kernel_partials",
    "kernel_value",
    "ksd_ustat",
    "ksdagg_test",
    "make_random_rbm",
    "median_bandwidth",
    "median_test",
    "pairwise_sq_dists",
    "parametric_bootstrap_stat",
    "perturb_rbm",
    "power_of_two_collection",
    "power_proxy",
    "select_bandwidth_by_proxy",
    "single_test",
    "split_test",
    "standard_normal_model",
    "stein_gram",
    "stein_gram_collection",
    "stein_kernel_entry",
    "stein_pair_values",
    "stein_ustats",
    "wild_bootstrap_stat",
    "wild_bootstrap_stats",
]
