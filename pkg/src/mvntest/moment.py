"""Skewness- and kurtosis-type statistics of scaled residuals.

All functions take scaled residuals (a :class:`~mvntest.sample.ScaledResiduals`
or a plain ``(n, d)`` array that is already standardized).

The three maximization-type statistics (Malkovich-Afifi skewness and
kurtosis, Cox-Small) only depend on the data through the third and fourth
empirical moment tensors, so the sphere search never touches the raw
``n x d`` matrix after those tensors are formed.
"""

from __future__ import annotations

import numpy as np

from .sample import as_residuals
from .search import SphereSearchConfig, maximize_on_sphere

__all__ = [
    "mardia_skewness",
    "mardia_kurtosis",
    "mrs_skewness",
    "koziol_kurtosis",
    "malkovich_afifi_skewness",
    "malkovich_afifi_kurtosis",
    "cox_small",
    "moment_tensors",
    "COX_SMALL_FLOOR",
]

#: denominators of the Cox-Small ratio at or below this value are discarded
COX_SMALL_FLOOR = 1e-12


def mardia_skewness(y) -> float:
    """Mardia's skewness ``n^-2 sum_{j,k} (Y_j'Y_k)^3``.

    Evaluated as the squared Frobenius norm of the third moment tensor,
    which is algebraically identical to the double sum.
    """
    t3, _ = moment_tensors(as_residuals(y), order=3)
    return float(max(np.sum(t3 * t3), 0.0))


def mardia_kurtosis(y) -> float:
    """Mardia's kurtosis ``n^-1 sum_j ||Y_j||^4``."""
    y = as_residuals(y)
    r2 = np.einsum("ij,ij->i", y, y)
    return float(np.mean(r2 * r2))


def mrs_skewness(y) -> float:
    """Mori-Rohatgi-Szekely skewness ``|| n^-1 sum_j ||Y_j||^2 Y_j ||^2``."""
    y = as_residuals(y)
    r2 = np.einsum("ij,ij->i", y, y)
    v = (r2[:, None] * y).mean(axis=0)
    return float(v @ v)


def koziol_kurtosis(y) -> float:
    """Koziol's kurtosis ``n^-2 sum_{j,k} (Y_j'Y_k)^4``.

    Computed as the squared Frobenius norm of the fourth moment tensor.
    """
    _, t4 = moment_tensors(as_residuals(y), order=4)
    return float(max(np.sum(t4 * t4), 0.0))


def moment_tensors(y: np.ndarray, order: int = 4):
    """Empirical third and (optionally) fourth moment tensors of the rows of y."""
    n = y.shape[0]
    t3 = np.einsum("ja,jb,jc->abc", y, y, y) / n
    t4 = np.einsum("ja,jb,jc,je->abce", y, y, y, y) / n if order >= 4 else None
    return t3, t4


def _cubic(t3, u):
    # v_a = T3[a, u, u]
    v = np.einsum("abc,sb,sc->sa", t3, u, u)
    return v, np.einsum("sa,sa->s", v, u)


def _quartic(t4, u):
    w = np.einsum("abce,sb,sc,se->sa", t4, u, u, u)
    return w, np.einsum("sa,sa->s", w, u)


def _search(fg, d, cfg):
    return maximize_on_sphere(fg, d, cfg or SphereSearchConfig())


def malkovich_afifi_skewness(y, cfg: SphereSearchConfig | None = None, full: bool = False):
    """Malkovich-Afifi skewness: max over unit u of ``(n^-1 sum (u'Y_j)^3)^2``.

    On scaled residuals ``u'S u = 1`` for every unit vector, so the ratio in
    the original definition reduces to the squared third moment. Returns the
    value, or the full :class:`~mvntest.search.SearchResult` if ``full``.
    """
    y = as_residuals(y)
    t3, _ = moment_tensors(y, order=3)

    def fg(u):
        v, s = _cubic(t3, u)
        return s * s, 6.0 * s[:, None] * v

    res = _search(fg, y.shape[1], cfg)
    return res if full else max(res.value, 0.0)


def malkovich_afifi_kurtosis(y, cfg: SphereSearchConfig | None = None, full: bool = False):
    """Malkovich-Afifi kurtosis: max over unit u of ``n^-1 sum (u'Y_j)^4``."""
    y = as_residuals(y)
    _, t4 = moment_tensors(y)

    def fg(u):
        w, k = _quartic(t4, u)
        return k, 4.0 * w

    res = _search(fg, y.shape[1], cfg)
    return res if full else max(res.value, 0.0)


def cox_small(y, cfg: SphereSearchConfig | None = None, full: bool = False):
    """Cox-Small nonlinearity statistic ``max_b eta_n^2(b)``.

    ``eta_n^2(b)`` is the squared empirical curvature of the regression of
    one linear combination on ``b'Y``. For ``d = 1`` the numerator vanishes
    identically and 0 is returned. Directions whose denominator is at most
    :data:`COX_SMALL_FLOOR` are discarded; if all are, raises
    :class:`~mvntest.search.DegenerateObjective`.
    """
    y = as_residuals(y)
    d = y.shape[1]
    if d == 1:
        return 0.0
    t3, t4 = moment_tensors(y)

    def fg(u):
        v, s = _cubic(t3, u)
        w, k = _quartic(t4, u)
        q = np.einsum("abc,sa,sc->sb", t3, v, u)
        num = np.einsum("sa,sa->s", v, v) - s * s
        den = k - 1.0 - s * s
        dnum = 4.0 * q - 6.0 * s[:, None] * v
        dden = 4.0 * w - 6.0 * s[:, None] * v
        bad = den <= COX_SMALL_FLOOR
        safe = np.where(bad, 1.0, den)
        f = np.where(bad, -np.inf, num / safe)
        grad = (dnum * safe[:, None] - num[:, None] * dden) / (safe * safe)[:, None]
        grad[bad] = 0.0
        return f, grad

    res = _search(fg, d, cfg)
    return res if full else max(res.value, 0.0)
