"""Weighted L2 statistics of the empirical CF / MGF of scaled residuals.

Each statistic is ``n`` times a weighted squared L2 distance between an
empirical transform of the scaled residuals and its value under
``N_d(0, I)``. All of them have closed forms as pairwise sums over the
sample (the HJM statistic over pairs of pairs), which is what is evaluated
here; the defining integrals are only used as test oracles.

Every function also accepts an optional vector of nonnegative
``weights`` (row multiplicities summing to ``n``). A sample containing
repeated rows then gives the same value as the collapsed sample with
multiplicities, which keeps bootstrap resampling cheap.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import logsumexp

from .sample import as_residuals

__all__ = [
    "ParameterError",
    "bhep",
    "hz",
    "hz_beta",
    "hj",
    "hjm",
    "hv",
    "deh",
    "deh_star",
    "HJM_MAX_N",
]

#: above this sample size ``hjm`` requires ``allow_large=True``
HJM_MAX_N = 200


class ParameterError(ValueError):
    """Tuning parameter outside the admissible range of a statistic."""


def _prepare(y, weights):
    y = as_residuals(y)
    if weights is None:
        w = np.ones(y.shape[0])
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (y.shape[0],) or np.any(w < 0):
            raise ValueError("weights must be a nonnegative vector with one entry per row")
    n = float(w.sum())
    r2 = np.einsum("ij,ij->i", y, y)
    gram = y @ y.T
    return y, w, n, r2, gram


def _sqdist(y, sign=-1.0):
    """||Y_j + sign * Y_k||^2 as a matrix, from coordinate differences.

    Differencing directly (rather than expanding the square) keeps the
    diagonal of the ``sign=-1`` matrix exactly zero, which matters when the
    distances are multiplied by a large bandwidth.
    """
    return cdist(y, -sign * y, "sqeuclidean")


def _check_positive(name, value, lower=0.0):
    if not (np.isfinite(value) and value > lower):
        raise ParameterError(f"{name} must exceed {lower:g}, got {value!r}")


def _pow_m1(base_log, power):
    """(exp(base_log))**power - 1 without cancellation."""
    return math.expm1(power * base_log)


def bhep(y, beta: float = 1.0, weights=None) -> float:
    """BHEP statistic with Gaussian weight of scale ``beta``.

    For ``beta < 1`` the terms are written with ``expm1`` so that the
    O(beta^6) value is not swamped by rounding in the O(n) individual terms.
    """
    _check_positive("beta", beta)
    y, w, n, r2, gram = _prepare(y, weights)
    d = y.shape[1]
    b2 = beta * beta
    d2 = _sqdist(y)
    a = math.exp(-0.5 * d * math.log1p(b2))  # (1 + b^2)^(-d/2)
    ex_single = -0.5 * b2 * r2 / (1.0 + b2)
    if beta < 1.0:
        pair = w @ np.expm1(-0.5 * b2 * d2) @ w / n
        single = -2.0 * a * float(w @ np.expm1(ex_single))
        # n * [1 - 2 a + (1 + 2b^2)^(-d/2)], each piece written as x - 1
        am1 = _pow_m1(math.log1p(b2), -0.5 * d)
        cm1 = _pow_m1(math.log1p(2.0 * b2), -0.5 * d)
        const = n * (-2.0 * am1 + cm1)
    else:
        pair = w @ np.exp(-0.5 * b2 * d2) @ w / n
        single = -2.0 * a * float(w @ np.exp(ex_single))
        const = n * math.exp(-0.5 * d * math.log1p(2.0 * b2))
    return float(max(pair + single + const, 0.0))


def hz_beta(n: int, d: int) -> float:
    """Henze-Zirkler bandwidth ``2^{-1/2} ((2d+1) n / 4)^{1/(d+4)}``."""
    return 2.0 ** -0.5 * ((2.0 * d + 1.0) * n / 4.0) ** (1.0 / (d + 4.0))


def hz(y, weights=None) -> float:
    """Henze-Zirkler statistic: BHEP at the MISE-optimal bandwidth."""
    y = as_residuals(y)
    n = y.shape[0] if weights is None else float(np.sum(weights))
    return bhep(y, hz_beta(n, y.shape[1]), weights=weights)


def _signed_exp_sum(exponent, coef):
    """sum(coef * exp(exponent)) evaluated in log space; may return +-inf."""
    lse, sign = logsumexp(exponent, b=coef, return_sign=True)
    if not np.isfinite(lse):
        return 0.0 if lse == -np.inf else float(sign) * np.inf
    if lse > 709.0:
        return float(sign) * np.inf
    return float(sign) * math.exp(lse)


def hj(y, gamma: float = 1.5, weights=None) -> float:
    """MGF-based statistic with weight ``exp(-gamma ||t||^2)``; needs gamma > 1.

    Expanded around the common factor ``(pi/gamma)^{d/2}`` with ``expm1``
    so the O(gamma^{-3-d/2}) behaviour for large gamma stays resolvable.
    """
    _check_positive("gamma", gamma, 1.0)
    y, w, n, r2, gram = _prepare(y, weights)
    d = y.shape[1]
    g = 1.0 / (4.0 * gamma)
    s2 = _sqdist(y, sign=+1.0)
    ww = np.outer(w, w) / n
    # log c1 = (d/2) log(gamma / (gamma - 1/2)), log c2 likewise with gamma - 1
    lc1 = -0.5 * d * math.log1p(-0.5 / gamma)
    lc2 = -0.5 * d * math.log1p(-1.0 / gamma)
    ex_pair = g * s2
    ex_single = r2 / (4.0 * gamma - 2.0)
    if max(ex_pair.max(), ex_single.max()) < 600.0:
        pair = float(np.sum(ww * np.expm1(ex_pair)))
        single = -2.0 * math.exp(lc1) * float(w @ np.expm1(ex_single))
        const = n * (-2.0 * math.expm1(lc1) + math.expm1(lc2))
        body = pair + single + const
    else:
        body = (
            _signed_exp_sum(ex_pair.ravel(), ww.ravel())
            - 2.0 * _signed_exp_sum(ex_single + lc1, w)
            + n * math.exp(lc2)
        )
    return float(max((math.pi / gamma) ** (0.5 * d) * body, 0.0))


def hjm(y, gamma: float = 1.5, weights=None, allow_large: bool = False, chunk: int = 8192) -> float:
    """Statistic based on the product of the empirical cosine transform and MGF.

    The defining fourfold sum is reorganized: for every pair sum
    ``b = Y_k + Y_m`` the inner double sum over ``(j, l)`` is a quadratic
    form in the vectors ``cos(Y'b / 2gamma)`` and ``sin(Y'b / 2gamma)``, so the
    work is a handful of ``n x n`` by ``n x n(n+1)/2`` matrix products.
    Requires ``gamma > 1``; ``n > HJM_MAX_N`` requires ``allow_large``.
    """
    _check_positive("gamma", gamma, 1.0)
    y, w, n, r2, gram = _prepare(y, weights)
    m = y.shape[0]
    if m > HJM_MAX_N and not allow_large:
        raise ParameterError(
            f"hjm cost grows like n^4; n={m} exceeds {HJM_MAX_N}, pass allow_large=True"
        )
    d = y.shape[1]
    g = 1.0 / (4.0 * gamma)
    c0 = (math.pi / gamma) ** (0.5 * d)

    # Kernel matrices: with P = exp(-g||Y_j - Y_l||^2), Q = exp(-g||Y_j + Y_l||^2)
    # the inner sum for pair sum b is
    #   q_b = 1/2 sum_{j,l} [P cos(h_j - h_l) + Q cos(h_j + h_l)].
    # Everything is carried as a deviation from its value at gamma = inf
    # (q_b -> n^2, exponentials -> 1) so that large gamma stays accurate.
    pm = np.expm1(-g * _sqdist(y, -1.0))
    qm = np.expm1(-g * _sqdist(y, +1.0))
    kplus = 0.5 * (pm + qm)
    kminus = 0.5 * (pm - qm)

    iu, ju = np.triu_indices(m)
    pw = w[iu] * w[ju] * np.where(iu == ju, 1.0, 2.0)
    keep = pw > 0
    iu, ju, pw = iu[keep], ju[keep], pw[keep]
    ex = g * (r2[iu] + r2[ju] + 2.0 * gram[iu, ju])  # g ||Y_k + Y_m||^2
    if ex.max() > 700.0:
        return np.inf
    n2 = n * n
    acc = 0.0
    for start in range(0, iu.size, chunk):
        sl = slice(start, start + chunk)
        h = (gram[:, iu[sl]] + gram[:, ju[sl]]) / (2.0 * gamma)
        cw = w[:, None] * np.cos(h)
        sw = w[:, None] * np.sin(h)
        cm1 = -2.0 * w[:, None] * np.sin(0.5 * h) ** 2  # w (cos h - 1)
        csum = cm1.sum(axis=0)
        dev = (
            csum * (csum + 2.0 * n)
            + np.einsum("jb,jb->b", cw, kplus @ cw)
            + np.einsum("jb,jb->b", sw, kminus @ sw)
        )
        acc += float(np.sum(pw[sl] * (np.expm1(ex[sl]) * (n2 + dev) + dev)))
    a_dev = acc / n2**2  # int R^2 M^2 w / c0 - 1

    y_arg = gram / (2.0 * gamma)
    bm1 = np.expm1(g * (r2[None, :] - r2[:, None])) * np.cos(y_arg) - 2.0 * np.sin(0.5 * y_arg) ** 2
    b_dev = float(w @ bm1 @ w) / n2  # int R M w / c0 - 1
    val = n * c0 * (a_dev - 2.0 * b_dev)
    return float(max(val, 0.0))


def hv(y, gamma: float = 5.0, weights=None) -> float:
    """Statistic from the PDE system ``grad M = t M`` of the normal MGF; gamma > 2."""
    _check_positive("gamma", gamma, 2.0)
    y, w, n, r2, gram = _prepare(y, weights)
    d = y.shape[1]
    s2 = _sqdist(y, sign=+1.0)
    poly = gram - s2 / (2.0 * gamma) + d / (2.0 * gamma) + s2 / (4.0 * gamma**2)
    coef = np.outer(w, w) * poly
    total = _signed_exp_sum((s2 / (4.0 * gamma)).ravel(), coef.ravel())
    return float(max((math.pi / gamma) ** (0.5 * d) * total / n, 0.0))


def deh(y, gamma: float = 0.25, weights=None) -> float:
    """Statistic from the harmonic-oscillator characterization of the normal CF."""
    _check_positive("gamma", gamma)
    y, w, n, r2, gram = _prepare(y, weights)
    d = y.shape[1]
    d2 = _sqdist(y)
    wr = w * r2
    t1 = (math.pi / gamma) ** (0.5 * d) * float(wr @ np.exp(-d2 / (4.0 * gamma)) @ wr) / n
    q = 2.0 * gamma + 1.0
    t2 = (
        2.0 * (2.0 * math.pi) ** (0.5 * d) / q ** (2.0 + 0.5 * d)
        * float(np.sum(wr * (r2 + 2.0 * d * gamma * q) * np.exp(-0.5 * r2 / q)))
    )
    t3 = (
        n * math.pi ** (0.5 * d) / (gamma + 1.0) ** (2.0 + 0.5 * d)
        * (gamma * (gamma + 1.0) * d * d + d * (d + 2.0) / 4.0)
    )
    return float(max(t1 - t2 + t3, 0.0))


def deh_star(y, gamma: float = 0.5, weights=None) -> float:
    """Statistic with the ECF substituted on both sides of the oscillator PDE."""
    _check_positive("gamma", gamma)
    y, w, n, r2, gram = _prepare(y, weights)
    d = y.shape[1]
    d2 = _sqdist(y)
    e = np.exp(-d2 / (4.0 * gamma))
    a = 2.0 * gamma * d * (2.0 * gamma - 1.0)
    b = 16.0 * d * d * gamma**3 * (gamma - 1.0) + 4.0 * d * (d + 2.0) * gamma**2
    c = (math.pi / gamma) ** (0.5 * d)
    ee = 8.0 * d * gamma**2 - 4.0 * (d + 2.0) * gamma
    rsum = r2[:, None] + r2[None, :]
    kern = (
        np.outer(r2, r2) * e
        - rsum / (4.0 * gamma**2) * (d2 + a) * e
        + e / (16.0 * gamma**4) * (b + d2 * d2 + ee * d2)
    )
    return float(max(c * float(w @ kern @ w) / n, 0.0))
