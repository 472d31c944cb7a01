"""Data ingestion and standardization to scaled residuals.

Every statistic in this package is a function of the scaled residuals
``Y_j = S^{-1/2} (X_j - mean)``, where ``S`` is the sample covariance with
the ``1/n`` factor and ``S^{-1/2}`` is its unique symmetric inverse root.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "InputError",
    "SingularCovariance",
    "Sample",
    "ScaledResiduals",
    "SymmetricRoot",
    "sample_moments",
    "inverse_sqrt",
    "standardize",
    "as_residuals",
    "load_dataset",
    "parse_dataset",
]

#: relative eigenvalue floor below which a covariance matrix is rejected
EIGEN_FLOOR = 1e-10


class InputError(ValueError):
    """Malformed or non-finite input data."""


class SingularCovariance(InputError):
    """Sample covariance is (numerically) singular.

    Usually the sample has ``n <= d`` rows or lies in an affine subspace.
    """


def _as_matrix(data) -> np.ndarray:
    x = np.array(data, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise InputError(f"expected a 2-d array of observations, got shape {x.shape}")
    if x.shape[1] < 1:
        raise InputError("data must have at least one column")
    bad = ~np.isfinite(x)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise InputError(f"non-finite entry at row {row}, column {col}")
    return x


@dataclass(frozen=True, eq=False)
class Sample:
    """An ``n x d`` matrix of observations (rows are observations)."""

    data: np.ndarray

    def __post_init__(self):
        x = _as_matrix(self.data)
        n, d = x.shape
        if n < d + 1:
            raise InputError(f"need n >= d + 1 observations, got n={n}, d={d}")
        x.setflags(write=False)
        object.__setattr__(self, "data", x)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True, eq=False)
class SymmetricRoot:
    """Symmetric inverse square root of an SPD matrix."""

    matrix: np.ndarray
    floor: float


@dataclass(frozen=True, eq=False)
class ScaledResiduals:
    """Standardized sample: column means 0, covariance (1/n factor) identity."""

    y: np.ndarray

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def d(self) -> int:
        return self.y.shape[1]

    def gram(self) -> np.ndarray:
        return self.y @ self.y.T


def sample_moments(sample) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and covariance matrix with the ``1/n`` normalization."""
    x = sample.data if isinstance(sample, Sample) else _as_matrix(sample)
    n = x.shape[0]
    if n < 2:
        raise InputError("need at least two observations")
    mean = x.mean(axis=0)
    xc = x - mean
    cov = xc.T @ xc / n
    cov = 0.5 * (cov + cov.T)
    return mean, cov


def inverse_sqrt(cov) -> SymmetricRoot:
    """Symmetric ``cov^{-1/2}`` via eigendecomposition.

    Raises :class:`SingularCovariance` if the smallest eigenvalue falls below
    ``1e-10`` times the largest one. No regularization is attempted.
    """
    s = np.asarray(cov, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise InputError("covariance must be a square matrix")
    if not np.all(np.isfinite(s)):
        raise InputError("covariance has non-finite entries")
    s = 0.5 * (s + s.T)
    evals, evecs = np.linalg.eigh(s)
    top = evals[-1]
    floor = EIGEN_FLOOR * top
    if top <= 0 or evals[0] <= floor:
        raise SingularCovariance(
            "sample covariance is singular or nearly so "
            f"(eigenvalues {evals[0]:.3g} .. {top:.3g}); "
            "check for n <= d, constant or collinear columns"
        )
    root = (evecs / np.sqrt(evals)) @ evecs.T
    root = 0.5 * (root + root.T)
    return SymmetricRoot(root, floor)


def standardize(sample) -> ScaledResiduals:
    """Scaled residuals ``S^{-1/2}(X_j - mean)`` of a sample."""
    if not isinstance(sample, Sample):
        sample = Sample(sample)
    mean, cov = sample_moments(sample)
    root = inverse_sqrt(cov)
    y = (sample.data - mean) @ root.matrix
    return ScaledResiduals(y)


def as_residuals(y) -> np.ndarray:
    """Return the residual matrix of ``y`` (ScaledResiduals or array-like)."""
    if isinstance(y, ScaledResiduals):
        return y.y
    arr = np.asarray(y, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


_SPLIT = re.compile(r"[,\s]+")


def parse_dataset(text: str, header: bool = False) -> Sample:
    """Parse comma- or whitespace-delimited numeric text into a Sample.

    Blank lines and lines starting with ``#`` are ignored. Errors cite the
    1-based line and column of the offending cell.
    """
    rows = []
    width = None
    skipped_header = not header
    for lineno, line in enumerate(io.StringIO(text), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if not skipped_header:
            skipped_header = True
            continue
        cells = [c for c in _SPLIT.split(stripped) if c != ""]
        row = []
        for col, cell in enumerate(cells, start=1):
            try:
                value = float(cell)
            except ValueError:
                raise InputError(
                    f"line {lineno}, column {col}: not a number: {cell!r}"
                ) from None
            if not np.isfinite(value):
                raise InputError(f"line {lineno}, column {col}: non-finite value {cell!r}")
            row.append(value)
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InputError(
                f"line {lineno}: expected {width} columns, found {len(row)}"
            )
        rows.append(row)
    if not rows:
        raise InputError("dataset contains no observations")
    return Sample(np.array(rows, dtype=float))


def load_dataset(path, header: bool = False) -> Sample:
    with open(path, encoding="utf-8") as fh:
        return parse_dataset(fh.read(), header=header)
