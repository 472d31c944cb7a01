"""Energy statistic against the standard normal law."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln, logsumexp

from .sample import as_residuals

__all__ = ["ENERGY_SCALINGS", "expected_dist_to_normal", "expected_normal_distance", "mean_normal_norm", "energy"]


def mean_normal_norm(d: int) -> float:
    """E||N|| for N ~ N_d(0, I): the chi mean sqrt(2) Gamma((d+1)/2) / Gamma(d/2)."""
    return math.exp(0.5 * math.log(2.0) + gammaln(0.5 * (d + 1)) - gammaln(0.5 * d))


def expected_normal_distance(d: int) -> float:
    """E||N_1 - N_2|| for independent standard normals: 2 Gamma((d+1)/2) / Gamma(d/2)."""
    return 2.0 * math.exp(gammaln(0.5 * (d + 1)) - gammaln(0.5 * d))


def _dist_from_norms(norm, d):
    """E||a - N|| as a function of ||a|| (vectorized).

    ||a - N||^2 is noncentral chi-square with d degrees of freedom and
    noncentrality ||a||^2, i.e. a Poisson(lambda = ||a||^2 / 2) mixture of
    central chi-squares with d + 2k degrees of freedom. Taking square roots
    termwise gives a Poisson mixture of chi means, summed here in log space
    over a window around the Poisson mode wide enough that the neglected
    mass is far below 1e-12.
    """
    norm = np.asarray(norm, dtype=float)
    out = np.empty_like(norm)
    # far from the origin the series loses digits in its log-gamma terms;
    # the three-term expansion in 1/||a|| is then exact to rounding
    big = norm > max(100.0, 20.0 * d)
    s = norm[big]
    out[big] = s + (d - 1.0) / (2.0 * s) - (d - 1.0) * (d - 3.0) / (8.0 * s**3)
    small = ~big
    if np.any(small):
        lam = 0.5 * norm[small] ** 2
        spread = 12.0 * np.sqrt(lam) + 40.0
        kmin = np.floor(np.maximum(lam - spread, 0.0))
        width = int(np.ceil((2.0 * spread).max())) + 1
        k = kmin[:, None] + np.arange(width)[None, :]
        # k log(lam) with the convention 0 log 0 = 0 (only k = 0 survives at lam = 0)
        loglam = np.log(np.maximum(lam, 1e-300))[:, None]
        logpois = -lam[:, None] + k * loglam - gammaln(k + 1.0)
        nu = d + 2.0 * k
        logmean = 0.5 * math.log(2.0) + gammaln(0.5 * (nu + 1.0)) - gammaln(0.5 * nu)
        out[small] = np.exp(logsumexp(logpois + logmean, axis=1))
    return out


def expected_dist_to_normal(a) -> float:
    """E||a - N|| for a fixed vector a and N ~ N_d(0, I), d = len(a)."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if a.ndim != 1 or not np.all(np.isfinite(a)):
        raise ValueError("a must be a finite vector")
    return float(_dist_from_norms(np.array([np.linalg.norm(a)]), a.size)[0])


ENERGY_SCALINGS = ("sample-covariance", "inflated")


def energy(y, scaling: str = "sample-covariance") -> float:
    """Energy statistic of the scaled residuals against N_d(0, I).

    Parameters
    ----------
    y : ScaledResiduals or array
        Residuals standardized with the 1/n covariance.
    scaling : {"sample-covariance", "inflated"}
        ``"sample-covariance"`` restandardizes with the (n - 1) covariance,
        i.e. multiplies the residuals by sqrt((n - 1) / n); this is the
        convention under which the usual null quantiles are tabulated.
        ``"inflated"`` multiplies by sqrt(n / (n - 1)) instead.
    """
    if scaling not in ENERGY_SCALINGS:
        raise ValueError(f"scaling must be one of {ENERGY_SCALINGS}")
    y = as_residuals(y)
    n, d = y.shape
    ratio = (n - 1.0) / n if scaling == "sample-covariance" else n / (n - 1.0)
    z = math.sqrt(ratio) * y
    norms = np.linalg.norm(z, axis=1)
    r2 = norms**2
    d2 = np.maximum(r2[:, None] + r2[None, :] - 2.0 * (z @ z.T), 0.0)
    np.fill_diagonal(d2, 0.0)
    pair = np.sqrt(d2).sum() / n**2
    cross = 2.0 * _dist_from_norms(norms, d).mean()
    return float(max(n * (cross - expected_normal_distance(d) - pair), 0.0))
