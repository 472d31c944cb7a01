"""Batched multistart maximization on the unit sphere and in a ball.

The sphere-search statistics (Malkovich-Afifi skewness and kurtosis, the
Cox-Small statistic) and the Pudelko supremum all need the global maximum of
a smooth function over a compact set. We run many local ascents at once as
one vectorized batch: each start keeps its own Barzilai-Borwein step, and a
step is accepted only if it does not decrease the objective.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "SphereSearchConfig",
    "SearchResult",
    "SearchWarning",
    "DegenerateObjective",
    "start_directions",
    "maximize_on_sphere",
    "maximize_in_ball",
]

# fg(U) -> (values (S,), euclidean gradients (S, d)); non-finite values mark
# infeasible candidates.
ValueAndGrad = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


class SearchWarning(RuntimeWarning):
    """A multistart search hit its iteration cap before converging."""


class DegenerateObjective(ArithmeticError):
    """Every candidate of a sphere search was infeasible."""


@dataclass(frozen=True)
class SphereSearchConfig:
    """Settings for the multistart sphere search.

    ``starts`` random unit vectors are used in addition to the ``2d`` signed
    coordinate axes; the effective number of random starts is at least
    ``max(2d, 20)``. ``seed`` selects the random stream for the start
    directions, so repeated calls are deterministic.
    """

    starts: int = 20
    max_iters: int = 400
    tol: float = 1e-11
    seed: int = 0

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("starts must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True, eq=False)
class SearchResult:
    value: float
    direction: np.ndarray
    converged: bool
    # objective at every start before ascent, for monotonicity checks
    start_values: np.ndarray = field(repr=False, default=None)


def start_directions(d: int, cfg: SphereSearchConfig) -> np.ndarray:
    """Signed axes followed by random unit vectors (deterministic in cfg.seed)."""
    axes = np.vstack([np.eye(d), -np.eye(d)])
    count = max(cfg.starts, 2 * d, 20)
    rng = np.random.default_rng([cfg.seed, d, 0x5EA4C4])
    z = rng.standard_normal((count, d))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return np.vstack([axes, z])


def _normalize(u):
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def _ascend(fg, x, retract, tangent, cfg):
    """Vectorized monotone ascent from every row of x.

    ``retract`` maps a trial point back to the feasible set; ``tangent``
    projects a gradient onto the directions that can be followed.
    """
    f, g = fg(x)
    f = np.where(np.isfinite(f), f, -np.inf)
    rg = tangent(g, x)
    gn = np.linalg.norm(rg, axis=1)
    eta = 0.25 / np.maximum(gn, 1e-300)
    scale = 1.0 + np.abs(np.where(np.isfinite(f), f, 0.0))
    active = np.isfinite(f) & (gn > cfg.tol * scale)
    for _ in range(cfg.max_iters):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xi = x[idx]
        trial = retract(xi + eta[idx, None] * rg[idx])
        ft, gt = fg(trial)
        ft = np.where(np.isfinite(ft), ft, -np.inf)
        ok = ft >= f[idx]
        acc = idx[ok]
        rej = idx[~ok]
        if acc.size:
            rg_new = tangent(gt[ok], trial[ok])
            s = trial[ok] - xi[ok]
            yv = rg[acc] - rg_new  # ascent: gradient shrinks along s
            sy = np.einsum("ij,ij->i", s, yv)
            ss = np.einsum("ij,ij->i", s, s)
            bb = np.where(sy > 0, ss / np.where(sy > 0, sy, 1.0), 2.0 * eta[acc])
            eta[acc] = np.clip(bb, 1e-12, 1e12)
            x[acc] = trial[ok]
            f[acc] = ft[ok]
            g[acc] = gt[ok]
            rg[acc] = rg_new
        if rej.size:
            eta[rej] *= 0.2
        gn = np.linalg.norm(rg, axis=1)
        scale = 1.0 + np.abs(np.where(np.isfinite(f), f, 0.0))
        step = eta * gn
        active = np.isfinite(f) & (gn > cfg.tol * scale) & (step > 1e-15)
    return x, f, rg, active


def maximize_on_sphere(
    fg: ValueAndGrad,
    d: int,
    cfg: SphereSearchConfig | None = None,
    starts: np.ndarray | None = None,
) -> SearchResult:
    """Maximize a smooth function over the unit sphere in R^d.

    Raises :class:`DegenerateObjective` if no candidate has a finite value.
    Emits :class:`SearchWarning` if the best candidate did not converge.
    """
    cfg = cfg or SphereSearchConfig()
    if d == 1:
        u = np.array([[1.0], [-1.0]])
        f, _ = fg(u)
        f = np.where(np.isfinite(f), f, -np.inf)
        if not np.isfinite(f).any():
            raise DegenerateObjective("objective undefined at both points of S^0")
        i = int(np.argmax(f))
        return SearchResult(float(f[i]), u[i].copy(), True, f.copy())

    u0 = start_directions(d, cfg) if starts is None else _normalize(np.array(starts, float))
    f0, _ = fg(u0)

    def tangent(g, u):
        return g - np.einsum("ij,ij->i", g, u)[:, None] * u

    u, f, _, active = _ascend(fg, u0.copy(), _normalize, tangent, cfg)
    if not np.isfinite(f).any():
        raise DegenerateObjective("objective undefined at every search candidate")
    i = int(np.argmax(f))
    converged = not bool(active[i])
    if not converged:
        warnings.warn("sphere search stopped at the iteration cap", SearchWarning, stacklevel=2)
    return SearchResult(float(f[i]), u[i].copy(), converged, f0)


def maximize_in_ball(
    fg: ValueAndGrad,
    starts: np.ndarray,
    radius: float,
    cfg: SphereSearchConfig | None = None,
) -> SearchResult:
    """Maximize a smooth function over the closed ball of the given radius."""
    cfg = cfg or SphereSearchConfig()
    x0 = np.array(starts, dtype=float)
    f0, _ = fg(x0)

    def retract(x):
        nrm = np.linalg.norm(x, axis=1, keepdims=True)
        return np.where(nrm > radius, x * (radius / np.maximum(nrm, 1e-300)), x)

    def tangent(g, x):
        # on the boundary only the inward or tangential part can be followed
        nrm = np.linalg.norm(x, axis=1)
        on_edge = nrm >= radius * (1 - 1e-12)
        radial = np.einsum("ij,ij->i", g, x) / np.maximum(nrm, 1e-300)
        outward = on_edge & (radial > 0)
        unit = x / np.maximum(nrm, 1e-300)[:, None]
        return np.where(outward[:, None], g - radial[:, None] * unit, g)

    x, f, _, active = _ascend(fg, retract(x0.copy()), retract, tangent, cfg)
    if not np.isfinite(f).any():
        raise DegenerateObjective("objective undefined at every search candidate")
    i = int(np.argmax(f))
    converged = not bool(active[i])
    if not converged:
        warnings.warn("ball search stopped at the iteration cap", SearchWarning, stacklevel=2)
    return SearchResult(float(f[i]), x[i].copy(), converged, f0)
