"""Hawkes processes simulated as competing hazards.

The excitation kernel of a Hawkes process is read as the hazard of a
defective waiting-time law. Each past event then owns a timer that may
never ring, and the next event is the earliest timer among the past
events and the baseline.
"""

from .baselines import ClusterConfig, ThinningConfig, cluster_simulate, thinning_simulate
from .bench import BenchReport, BenchScenario, default_grid, run_bench, scenario_params
from .datasets import FIXTURE_MODEL, generate_fixture, load_fixture
from .estimator import HawkesEstimator
from .exceptions import InsufficientDataError, UnstableModelError, UnsupportedKernelError
from .inference import (
    FitResult,
    GofResult,
    fit_mle,
    kolmogorov_sf,
    ks_exponential,
    log_likelihood,
    rescaled_times,
    time_rescale_test,
)
from .kernels import (
    NEVER,
    CensoredExponential,
    GevMinTruncated,
    Gompertz,
    Omori,
    PiecewiseConstantHazard,
    WaitingDistribution,
    kernel_from_dict,
)
from .model import EventSequence, HawkesModel, check_stable
from .seeding import spawn_seeds
from .simulate import SimConfig, SimResult, continue_from, prune_candidates, simulate, simulate_min_stable

__version__ = "0.1.0"

__all__ = [
    "NEVER",
    "BenchReport",
    "BenchScenario",
    "CensoredExponential",
    "ClusterConfig",
    "EventSequence",
    "FIXTURE_MODEL",
    "FitResult",
    "GevMinTruncated",
    "GofResult",
    "Gompertz",
    "HawkesEstimator",
    "HawkesModel",
    "InsufficientDataError",
    "Omori",
    "PiecewiseConstantHazard",
    "SimConfig",
    "SimResult",
    "ThinningConfig",
    "UnstableModelError",
    "UnsupportedKernelError",
    "WaitingDistribution",
    "check_stable",
    "cluster_simulate",
    "continue_from",
    "default_grid",
    "fit_mle",
    "generate_fixture",
    "kernel_from_dict",
    "kolmogorov_sf",
    "ks_exponential",
    "load_fixture",
    "log_likelihood",
    "prune_candidates",
    "rescaled_times",
    "run_bench",
    "scenario_params",
    "simulate",
    "simulate_min_stable",
    "spawn_seeds",
    "thinning_simulate",
    "time_rescale_test",
]
