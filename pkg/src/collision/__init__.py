"""Collision-probability estimation, sublinear uniformity testing, and
executable versions of the estimator's tail and moment bounds."""

__version__ = "0.1.0"

from .bounds import (
    SubGammaParams,
    TailEnvelope,
    aggregate_subgamma,
    moment_subgamma_check,
    scale_param,
    subgamma_tail,
    theorem1_envelope,
    variance_proxy,
)
from .defaults import load_defaults
from .distribution import (
    DiscretePmf,
    SampleSeed,
    collision_probability,
    make_pmf,
    planted_bias,
    power_sum,
    sample_histogram,
    uniform,
    zipf,
)
from .estimator import (
    CollisionEstimate,
    Decision,
    SampleHistogram,
    entropy_estimate,
    entropy_sample_size,
    estimate_from_histogram,
    estimate_pairwise,
    histogram_of,
    tester_sample_size,
    uniformity_test,
)

__all__ = [
    "CollisionEstimate",
    "Decision",
    "DiscretePmf",
    "SampleHistogram",
    "SampleSeed",
    "SubGammaParams",
    "TailEnvelope",
    "aggregate_subgamma",
    "collision_probability",
    "entropy_estimate",
    "entropy_sample_size",
    "estimate_from_histogram",
    "estimate_pairwise",
    "histogram_of",
    "load_defaults",
    "make_pmf",
    "moment_subgamma_check",
    "planted_bias",
    "power_sum",
    "sample_histogram",
    "scale_param",
    "subgamma_tail",
    "tester_sample_size",
    "theorem1_envelope",
    "uniform",
    "uniformity_test",
    "variance_proxy",
    "zipf",
]
