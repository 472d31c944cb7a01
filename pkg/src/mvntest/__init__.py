"""Affine invariant tests of multivariate normality.

The package computes a battery of test statistics on a data matrix,
simulates their null distributions, runs power studies against a catalogue
of alternatives and provides bootstrap inference on the distance to
normality estimated by the weighted L2 statistics.
"""

__version__ = "0.1.0"

from .alternatives import AlternativeSpec, parse_alternative, sample_alternative
from .energy import energy
from .harmonics import mq_statistic
from .moment import (
    cox_small,
    koziol_kurtosis,
    malkovich_afifi_kurtosis,
    malkovich_afifi_skewness,
    mardia_kurtosis,
    mardia_skewness,
    mrs_skewness,
)
from .montecarlo import (
    ConfigError,
    CriticalValueRecord,
    SimulationConfig,
    critical_value,
    critical_values,
    empirical_power,
    mc_pvalue,
    power_study,
)
from .pudelko import pudelko
from .registry import SpecError, TestSpec, default_battery, evaluate, parse_tests, statistic
from .sample import InputError, Sample, SingularCovariance, load_dataset, parse_dataset, standardize
from .validation import bootstrap_ci, bootstrap_delta, delta_hat, neighborhood_test
from .weighted_l2 import bhep, deh, deh_star, hj, hjm, hv, hz

__all__ = [
    "AlternativeSpec", "parse_alternative", "sample_alternative",
    "energy", "mq_statistic", "pudelko",
    "cox_small", "koziol_kurtosis", "malkovich_afifi_kurtosis", "malkovich_afifi_skewness",
    "mardia_kurtosis", "mardia_skewness", "mrs_skewness",
    "ConfigError", "CriticalValueRecord", "SimulationConfig", "critical_value", "critical_values",
    "empirical_power", "mc_pvalue", "power_study",
    "SpecError", "TestSpec", "default_battery", "evaluate", "parse_tests", "statistic",
    "InputError", "Sample", "SingularCovariance", "load_dataset", "parse_dataset", "standardize",
    "bootstrap_ci", "bootstrap_delta", "delta_hat", "neighborhood_test",
    "bhep", "deh", "deh_star", "hj", "hjm", "hv", "hz",
]
