"""Inference on the distance-to-normality functional of weighted L2 tests.

For a weighted L2 statistic ``T_n`` the ratio ``T_n / n`` estimates the
population distance ``Delta`` between the law of the standardized data and
the standard normal law. The standard error of ``sqrt(n)(T_n/n - Delta)``
is estimated by the nonparametric bootstrap: rows are resampled, the
bootstrap sample is standardized afresh and the statistic recomputed.

Repeated rows are collapsed to multiplicities first, so resampling a data
set with few distinct rows costs only as much as its distinct rows.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .montecarlo import ConfigError
from .registry import WEIGHTED_L2, TestSpec, evaluate
from .rng import stream
from .sample import Sample, SingularCovariance, inverse_sqrt

__all__ = [
    "DeltaEstimate",
    "ConfidenceInterval",
    "NeighborhoodResult",
    "DegenerateBootstrap",
    "delta_hat",
    "bootstrap_delta",
    "bootstrap_ci",
    "neighborhood_test",
]


#: bootstrap spreads below this (relative to max(delta_hat, 1)) count as zero
DEGENERATE_RTOL = 1e-12


class DegenerateBootstrap(RuntimeWarning):
    """The bootstrap distribution has no spread; the interval was widened."""


@dataclass(frozen=True)
class DeltaEstimate:
    test: TestSpec
    n: int
    delta_hat: float
    sigma: float  # bootstrap standard deviation of sqrt(n) * delta_hat
    reps: int

    @property
    def variance(self) -> float:
        """Estimated variance of delta_hat itself (sigma^2 / n)."""
        return self.sigma**2 / self.n


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    estimate: DeltaEstimate


@dataclass(frozen=True)
class NeighborhoodResult:
    reject: bool
    delta_hat: float
    sigma: float
    threshold: float
    delta0: float


def _check_test(test):
    test = test if isinstance(test, TestSpec) else TestSpec.parse(test)
    if test.name not in WEIGHTED_L2:
        raise ConfigError(f"{test} is not a weighted L2 statistic; no distance functional")
    return test


def _collapse(x):
    rows, counts = np.unique(x, axis=0, return_counts=True)
    return rows, counts.astype(float)


def _weighted_residuals(rows, w):
    n = w.sum()
    mean = w @ rows / n
    xc = rows - mean
    cov = (xc * w[:, None]).T @ xc / n
    return xc @ inverse_sqrt(cov).matrix


def _stat(test, rows, w):
    keep = w > 0
    rows, w = rows[keep], w[keep]
    y = _weighted_residuals(rows, w)
    return evaluate(test, y, weights=w, allow_large=True)


def delta_hat(test, sample) -> float:
    """T_n / n for a weighted L2 statistic."""
    test = _check_test(test)
    sample = sample if isinstance(sample, Sample) else Sample(sample)
    rows, w = _collapse(sample.data)
    return max(_stat(test, rows, w), 0.0) / sample.n


def bootstrap_delta(test, sample, reps: int = 200, seed: int = 0) -> DeltaEstimate:
    """delta_hat together with the bootstrap standard deviation of sqrt(n) delta_hat."""
    if reps < 2:
        raise ConfigError("need at least two bootstrap replications")
    test = _check_test(test)
    sample = sample if isinstance(sample, Sample) else Sample(sample)
    n = sample.n
    rows, w = _collapse(sample.data)
    est = max(_stat(test, rows, w), 0.0) / n
    probs = w / n
    boot = []
    for b in range(reps):
        counts = stream(seed, f"bootstrap|{test}", b).multinomial(n, probs).astype(float)
        try:
            boot.append(_stat(test, rows, counts) / n)
        except SingularCovariance:
            continue  # resample fell into a lower-dimensional set
    boot = np.asarray(boot)
    if boot.size < 2:
        sigma = 0.0
    else:
        sigma = math.sqrt(n * np.var(boot, ddof=1))
    return DeltaEstimate(test, n, est, sigma, int(boot.size))


def bootstrap_ci(test, sample, alpha: float = 0.1, reps: int = 200, seed: int = 0) -> ConfidenceInterval:
    """Asymptotic interval delta_hat -+ z_{1-alpha/2} sigma_hat / sqrt(n).

    The lower endpoint is reported as computed, even if negative. If the
    bootstrap spread is zero up to rounding a :class:`DegenerateBootstrap` warning is
    issued and the interval widened to [0, inf).
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError("alpha must lie in (0, 1)")
    if reps < 200:
        raise ConfigError("bootstrap_ci needs at least 200 replications")
    est = bootstrap_delta(test, sample, reps, seed)
    if not est.sigma > DEGENERATE_RTOL * max(est.delta_hat, 1.0):
        warnings.warn("bootstrap distribution is degenerate; interval widened",
                      DegenerateBootstrap, stacklevel=2)
        return ConfidenceInterval(0.0, math.inf, 1.0 - alpha, est)
    half = norm.ppf(1.0 - alpha / 2.0) * est.sigma / math.sqrt(est.n)
    return ConfidenceInterval(est.delta_hat - half, est.delta_hat + half, 1.0 - alpha, est)


def neighborhood_test(test, sample, delta0: float, alpha: float = 0.05, reps: int = 200,
                      seed: int = 0) -> NeighborhoodResult:
    """Test H: Delta >= delta0 against closeness to normality (Delta < delta0).

    Rejects when ``delta_hat <= delta0 - sigma_hat / sqrt(n) * z_{1-alpha}``.
    """
    if not delta0 > 0:
        raise ConfigError("delta0 must be positive")
    if not 0.0 < alpha < 1.0:
        raise ConfigError("alpha must lie in (0, 1)")
    est = bootstrap_delta(test, sample, reps, seed)
    threshold = delta0 - est.sigma / math.sqrt(est.n) * norm.ppf(1.0 - alpha)
    return NeighborhoodResult(bool(est.delta_hat <= threshold), est.delta_hat, est.sigma,
                              threshold, delta0)
