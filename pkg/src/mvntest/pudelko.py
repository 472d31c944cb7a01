"""Weighted supremum distance between the empirical and the normal CF."""

from __future__ import annotations

import math

import numpy as np

from .sample import as_residuals
from .search import SphereSearchConfig, maximize_in_ball, start_directions

__all__ = ["pudelko", "pudelko_objective", "PudelkoGrid"]


class PudelkoGrid:
    """Seeding grid for the supremum search: radii times hemisphere directions.

    The objective is even in t, so only one direction of each antipodal pair
    is needed.
    """

    def __init__(self, d: int, radii: int = 24, angles: int = 72, seed: int = 0):
        self.radii = radii
        if d == 1:
            dirs = np.ones((1, 1))
        elif d == 2:
            th = np.pi * np.arange(angles) / angles
            dirs = np.column_stack([np.cos(th), np.sin(th)])
        else:
            cfg = SphereSearchConfig(starts=40 * d * d, seed=seed)
            dirs = start_directions(d, cfg)
            first = dirs[np.arange(len(dirs)), np.argmax(np.abs(dirs) > 1e-12, axis=1)]
            dirs = dirs[first > 0]
        self.directions = dirs

    def points(self, r: float) -> np.ndarray:
        rad = r * np.arange(1, self.radii + 1) / self.radii
        return (rad[:, None, None] * self.directions[None, :, :]).reshape(-1, self.directions.shape[1])


def pudelko_objective(y):
    """Return fg(T) -> (h, grad h) with h(t) = |Psi_n(t) - exp(-|t|^2/2)|^2 / |t|^2."""
    y = as_residuals(y)
    n = y.shape[0]

    def fg(t):
        arg = t @ y.T  # (S, n)
        c = np.cos(arg)
        s = np.sin(arg)
        cm = c.mean(axis=1)
        sm = s.mean(axis=1)
        t2 = np.einsum("ij,ij->i", t, t)
        e = np.exp(-0.5 * t2)
        re = cm - e
        num = re * re + sm * sm
        safe = np.where(t2 > 0, t2, 1.0)
        h = np.where(t2 > 0, num / safe, 0.0)
        # d/dt of C, S and exp(-|t|^2/2)
        dc = -(s @ y) / n
        ds = (c @ y) / n
        dnum = 2.0 * re[:, None] * (dc + t * e[:, None]) + 2.0 * sm[:, None] * ds
        grad = (dnum - 2.0 * h[:, None] * t) / safe[:, None]
        grad[t2 == 0] = 0.0
        return h, grad

    return fg


def pudelko(y, r: float = 2.0, cfg: SphereSearchConfig | None = None,
            grid: PudelkoGrid | None = None, refine: int | None = None) -> float:
    """sqrt(n) * sup_{0 < |t| <= r} |Psi_n(t) - Psi_0(t)| / |t|.

    The ratio extends continuously by 0 at t = 0 on standardized data. The
    supremum is located by a radial-spherical seeding grid followed by
    gradient ascent in the ball from the ``refine`` best grid points
    (default 6 for d <= 2 and 20 d^2 above, where the grid is sparser).
    """
    if not (np.isfinite(r) and r > 0):
        raise ValueError("r must be positive")
    y = as_residuals(y)
    n, d = y.shape
    cfg = cfg or SphereSearchConfig()
    grid = grid or PudelkoGrid(d, seed=cfg.seed)
    fg = pudelko_objective(y)
    pts = grid.points(r)
    h0, _ = fg(pts)
    if refine is None:
        refine = 6 if d <= 2 else 20 * d * d
    best = np.argsort(h0)[::-1][:refine]
    res = maximize_in_ball(fg, pts[best], r, cfg)
    return math.sqrt(n) * math.sqrt(max(res.value, float(h0.max()), 0.0))
