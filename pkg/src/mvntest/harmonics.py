"""Spherical-harmonic (Manzotti-Quiroz type) statistics.

Only the span of the harmonics of each degree matters for the quadratic
form, so instead of building classical harmonics we orthonormalize the
monomials of degree <= m restricted to the unit sphere with respect to the
uniform measure. Inner products are exact: the moments of the uniform
distribution on the sphere are known in closed form.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .sample import as_residuals

__all__ = [
    "SpherePolyBasis",
    "MQPrecomp",
    "build_sphere_basis",
    "harmonic_dimension",
    "sphere_moment",
    "mq_precompute",
    "mq_statistic",
    "chi_moment",
]

PRUNE_TOL = 1e-9


def harmonic_dimension(d: int, j: int) -> int:
    """Number of linearly independent spherical harmonics of degree j in R^d."""
    def c(a, b):
        return math.comb(a, b) if b >= 0 and a >= 0 else 0
    return c(d + j - 1, j) - c(d + j - 3, j - 2)


def _rising(a: float, k: int) -> float:
    return math.exp(gammaln(a + k) - gammaln(a)) if k else 1.0


def sphere_moment(alpha) -> float:
    """E prod u_i^alpha_i for u uniform on the unit sphere (len(alpha) = d)."""
    alpha = tuple(int(a) for a in alpha)
    if any(a % 2 for a in alpha):
        return 0.0
    half = [a // 2 for a in alpha]
    num = math.prod(_rising(0.5, b) for b in half)
    return num / _rising(0.5 * len(alpha), sum(half))


def _exponents(d: int, max_degree: int) -> np.ndarray:
    rows = []
    for deg in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(d), deg):
            e = [0] * d
            for i in combo:
                e[i] += 1
            rows.append(e)
    return np.array(rows, dtype=int)


@dataclass(frozen=True, eq=False)
class SpherePolyBasis:
    """Orthonormal polynomial basis on the sphere, constant first.

    ``coef[:, i]`` holds the monomial coefficients of basis function i;
    ``degree[i]`` is the degree of the harmonic space it belongs to.
    """

    d: int
    max_degree: int
    exponents: np.ndarray
    coef: np.ndarray
    degree: np.ndarray

    @property
    def k(self) -> int:
        """Number of non-constant basis functions."""
        return self.coef.shape[1] - 1

    def gram(self) -> np.ndarray:
        return self.coef.T @ _monomial_gram(self.exponents) @ self.coef

    def monomials(self, u: np.ndarray) -> np.ndarray:
        # (n, m) products u^alpha
        return np.prod(u[:, None, :] ** self.exponents[None, :, :], axis=2)

    def evaluate(self, u: np.ndarray) -> np.ndarray:
        """Basis functions at the rows of u, shape (n, 1 + k)."""
        return self.monomials(u) @ self.coef


def _monomial_gram(exponents):
    m = exponents.shape[0]
    g = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            g[i, j] = g[j, i] = sphere_moment(exponents[i] + exponents[j])
    return g


def build_sphere_basis(d: int, max_degree: int, order=None) -> SpherePolyBasis:
    """Gram-Schmidt on monomials of degree <= max_degree restricted to the sphere.

    Monomials are processed by degree; within a degree the optional
    ``order`` callback may permute them, which yields a different but
    equally valid basis of the same graded subspaces. A monomial whose
    residual norm falls below ``PRUNE_TOL`` times its own norm is dropped
    (on the sphere ``sum u_i^2 = 1`` makes many of them dependent).
    """
    if d < 1 or max_degree < 0:
        raise ValueError("need d >= 1 and max_degree >= 0")
    ex = _exponents(d, max_degree)
    if order is not None:
        blocks = []
        for deg in range(max_degree + 1):
            idx = np.flatnonzero(ex.sum(axis=1) == deg)
            blocks.append(idx[np.asarray(order(deg, len(idx)))])
        ex = ex[np.concatenate(blocks)]
    g = _monomial_gram(ex)
    m = ex.shape[0]
    basis = []
    degrees = []
    for i in range(m):
        v = np.zeros(m)
        v[i] = 1.0
        own = g[i, i]
        for _ in range(2):  # re-orthogonalize once for stability
            for b in basis:
                v -= (b @ g @ v) * b
        nrm2 = v @ g @ v
        if nrm2 <= PRUNE_TOL * own:
            continue
        basis.append(v / math.sqrt(nrm2))
        degrees.append(int(ex[i].sum()))
    return SpherePolyBasis(d, max_degree, ex, np.column_stack(basis), np.array(degrees))


def chi_moment(d: int, k: float) -> float:
    """E||X||^k for X ~ N_d(0, I)."""
    return math.exp(0.5 * k * math.log(2.0) + gammaln(0.5 * (d + k)) - gammaln(0.5 * d))


@dataclass(frozen=True, eq=False)
class MQPrecomp:
    """Basis, null means and null covariance for one MQ variant in dimension d."""

    variant: str
    d: int
    basis: SpherePolyBasis
    mean: np.ndarray
    cov: np.ndarray
    cov_inv: np.ndarray

    @property
    def k(self) -> int:
        return self.mean.size


@functools.lru_cache(maxsize=None)
def mq_precompute(variant: str, d: int) -> MQPrecomp:
    """Precomputation for ``"f1"`` (harmonics of degree 1..4) or ``"f2"``.

    ``"f2"`` uses ||x|| and ||x||^3 g(u) for every basis function g of
    degree <= 2, the constant included.
    """
    if d < 1:
        raise ValueError("d must be positive")
    if variant == "f1":
        basis = build_sphere_basis(d, 4)
        k = basis.k
        mean = np.zeros(k)
        cov = np.eye(k)
    elif variant == "f2":
        basis = build_sphere_basis(d, 2)
        k = basis.k + 2
        m1, m2, m3, m4, m6 = (chi_moment(d, p) for p in (1, 2, 3, 4, 6))
        mean = np.zeros(k)
        mean[0], mean[1] = m1, m3
        cov = np.zeros((k, k))
        cov[:2, :2] = [[m2 - m1 * m1, m4 - m1 * m3], [m4 - m1 * m3, m6 - m3 * m3]]
        cov[2:, 2:] = m6 * np.eye(k - 2)
    else:
        raise ValueError(f"unknown MQ variant {variant!r}")
    cov_inv = np.linalg.inv(cov)
    for a in (mean, cov, cov_inv):
        a.setflags(write=False)
    return MQPrecomp(variant, d, basis, mean, cov, cov_inv)


def _directions(y):
    r = np.linalg.norm(y, axis=1)
    u = np.divide(y, r[:, None], out=np.zeros_like(y), where=r[:, None] > 0)
    return r, u


def mq_statistic(y, pre: MQPrecomp | str = "f1") -> float:
    """Quadratic form nu_n' V^{-1} nu_n of centred sample averages."""
    y = as_residuals(y)
    n, d = y.shape
    if isinstance(pre, str):
        pre = mq_precompute(pre, d)
    if pre.d != d:
        raise ValueError(f"precomputation is for d={pre.d}, data has d={d}")
    r, u = _directions(y)
    g = pre.basis.evaluate(u)
    if pre.variant == "f1":
        f = g[:, 1:]
    else:
        f = np.column_stack([r, (r**3)[:, None] * g])
    nu = (f - pre.mean).sum(axis=0) / math.sqrt(n)
    return float(max(nu @ pre.cov_inv @ nu, 0.0))
