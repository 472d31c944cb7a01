"""Samplers for the alternative distributions of the power study.

Each family has a canonical text encoding, e.g.::

    nmix:p=0.5,mu=3,sigma=I       (1-p) N(0, I) + p N(mu 1_d, Sigma), sigma in {I, B}
    t:nu=3                        multivariate t with nu degrees of freedom
    iid:dist=unif(0,1)            independent marginals
    spherical:radial=exp(1)       R * U with U uniform on the sphere
    mar:dist=chisq(3)             N_d(0, I) with the last component replaced
    nm:theta=0.2                  0.5 N(0, Sigma_theta) + 0.5 N(0, Sigma_-theta)
    sabsnorm                      S|N_d|, one random sign per observation
    null-reference                N_d((1..d), Sigma_0.5)
    normal                        N_d(0, I)

Univariate laws are written ``name(arg,...)``: ``unif(a,b)``, ``norm(m,s)``,
``lnorm(meanlog,sdlog)``, ``beta(a,b)``, ``exp(rate)``, ``chisq(df)``,
``t(df)``, ``gamma(shape,rate)``, ``pearson2(a,loc,scale)`` (symmetric beta
on loc +- scale) and ``pearson7(df,loc,scale)`` (scaled Student t).
:func:`parse_alternative` and ``str`` are mutually inverse on canonical text.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .registry import SpecError, _fmt_number
from .sample import Sample

__all__ = [
    "Dist",
    "AlternativeSpec",
    "parse_alternative",
    "sample_alternative",
    "null_reference",
    "equicorrelation",
]

_DISTS = {
    # name: (arity, validator)
    "unif": (2, lambda a, b: a < b),
    "norm": (2, lambda m, s: s > 0),
    "lnorm": (2, lambda m, s: s > 0),
    "beta": (2, lambda a, b: a > 0 and b > 0),
    "exp": (1, lambda r: r > 0),
    "chisq": (1, lambda k: k > 0),
    "t": (1, lambda k: k > 0),
    "gamma": (2, lambda k, r: k > 0 and r > 0),
    "pearson2": (3, lambda a, loc, s: a > 0 and s > 0),
    "pearson7": (3, lambda k, loc, s: k > 0 and s > 0),
}

_DIST_RE = re.compile(r"^([a-z0-9]+)\((.*)\)$")


@dataclass(frozen=True)
class Dist:
    """A univariate law by name and parameters."""

    name: str
    args: tuple

    def __post_init__(self):
        if self.name not in _DISTS:
            raise SpecError(f"unknown distribution {self.name!r}; known: {', '.join(_DISTS)}")
        arity, ok = _DISTS[self.name]
        args = tuple(float(a) for a in self.args)
        if len(args) != arity:
            raise SpecError(f"{self.name} takes {arity} parameter(s), got {len(args)}")
        if not all(math.isfinite(a) for a in args) or not ok(*args):
            raise SpecError(f"invalid parameters for {self.name}: {args}")
        object.__setattr__(self, "args", args)

    def __str__(self):
        return f"{self.name}({','.join(_fmt_number(a) for a in self.args)})"

    @classmethod
    def parse(cls, text: str) -> "Dist":
        m = _DIST_RE.match(text.strip().lower())
        if not m:
            raise SpecError(f"malformed distribution {text!r}; expected name(arg,...)")
        try:
            args = tuple(float(a) for a in m.group(2).split(",")) if m.group(2) else ()
        except ValueError:
            raise SpecError(f"non-numeric parameter in {text!r}") from None
        return cls(m.group(1), args)

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        a = self.args
        n = self.name
        if n == "unif":
            return rng.uniform(a[0], a[1], size)
        if n == "norm":
            return rng.normal(a[0], a[1], size)
        if n == "lnorm":
            return rng.lognormal(a[0], a[1], size)
        if n == "beta":
            return rng.beta(a[0], a[1], size)
        if n == "exp":
            return rng.exponential(1.0 / a[0], size)
        if n == "chisq":
            return rng.chisquare(a[0], size)
        if n == "t":
            return rng.standard_t(a[0], size)
        if n == "gamma":
            return rng.gamma(a[0], 1.0 / a[1], size)
        if n == "pearson2":
            # density proportional to (1 - x^2)^(a-1) on (-1, 1), then location/scale
            return a[1] + a[2] * (2.0 * rng.beta(a[0], a[0], size) - 1.0)
        if n == "pearson7":
            return a[1] + a[2] * rng.standard_t(a[0], size)
        raise AssertionError(n)  # pragma: no cover


# family: ordered (key, kind) pairs; kind is "num", "dist" or a set of words
_FAMILIES = {
    "nmix": (("p", "num"), ("mu", "num"), ("sigma", {"I", "B"})),
    "t": (("nu", "num"),),
    "iid": (("dist", "dist"),),
    "spherical": (("radial", "dist"),),
    "mar": (("dist", "dist"),),
    "nm": (("theta", "num"),),
    "sabsnorm": (),
    "null-reference": (),
    "normal": (),
}


def _split_top(text):
    """Split on commas that are not inside parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return out


@dataclass(frozen=True)
class AlternativeSpec:
    """A family tag with its parameters; the dimension is supplied when sampling."""

    family: str
    params: tuple = ()

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise SpecError(f"unknown alternative {self.family!r}; known: {', '.join(_FAMILIES)}")
        schema = _FAMILIES[self.family]
        given = dict(self.params)
        if set(given) != {k for k, _ in schema}:
            raise SpecError(
                f"{self.family} needs parameters {[k for k, _ in schema]}, got {sorted(given)}"
            )
        clean = []
        for key, kind in schema:
            v = given[key]
            if kind == "num":
                v = float(v)
                if not math.isfinite(v):
                    raise SpecError(f"{self.family}: {key} must be finite")
            elif kind == "dist":
                v = v if isinstance(v, Dist) else Dist.parse(str(v))
            else:
                v = str(v).upper()
                if v not in kind:
                    raise SpecError(f"{self.family}: {key} must be one of {sorted(kind)}")
            clean.append((key, v))
        object.__setattr__(self, "params", tuple(clean))
        p = dict(clean)
        if self.family == "nmix" and not 0.0 < p["p"] < 1.0:
            raise SpecError("nmix: p must lie in (0, 1)")
        if self.family == "t" and not p["nu"] > 0:
            raise SpecError("t: nu must be positive")

    def param(self, key):
        return dict(self.params)[key]

    def __str__(self):
        if not self.params:
            return self.family
        parts = []
        for k, v in self.params:
            parts.append(f"{k}={_fmt_number(v) if isinstance(v, float) else v}")
        return self.family + ":" + ",".join(parts)

    def check_dimension(self, d: int):
        if d < 1:
            raise SpecError("dimension must be positive")
        if self.family == "nm":
            th = self.param("theta")
            if d > 1 and not (-1.0 / (d - 1) < th < 1.0 and -1.0 / (d - 1) < -th < 1.0):
                raise SpecError(f"nm: theta={th} gives a singular covariance for d={d}")


def parse_alternative(text: str) -> AlternativeSpec:
    text = text.strip()
    family, _, rest = text.partition(":")
    family = family.strip().lower()
    params = []
    if rest:
        for item in _split_top(rest):
            key, eq, val = item.partition("=")
            if not eq:
                raise SpecError(f"malformed parameter {item!r} in {text!r}")
            params.append((key.strip().lower(), val.strip()))
    schema = dict(_FAMILIES.get(family, ()))
    typed = []
    for k, v in params:
        if schema.get(k) == "num":
            try:
                v = float(v)
            except ValueError:
                raise SpecError(f"{family}: {k} must be a number, got {v!r}") from None
        typed.append((k, v))
    return AlternativeSpec(family, tuple(typed))


def equicorrelation(d: int, rho: float) -> np.ndarray:
    """d x d matrix with unit diagonal and constant off-diagonal rho."""
    return np.full((d, d), rho) + (1.0 - rho) * np.eye(d)


def _uniform_sphere(rng, n, d):
    z = rng.standard_normal((n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample_alternative(spec: AlternativeSpec, d: int, n: int, rng: np.random.Generator) -> Sample:
    """n independent draws from the d-variate law described by spec."""
    spec.check_dimension(d)
    if n < d + 1:
        raise SpecError(f"need n >= d + 1, got n={n}, d={d}")
    f = spec.family
    if f == "normal":
        x = rng.standard_normal((n, d))
    elif f == "null-reference":
        return null_reference(d, n, rng)
    elif f == "nmix":
        p, mu = spec.param("p"), spec.param("mu")
        z = rng.standard_normal((n, d))
        shifted = rng.random(n) < p
        if spec.param("sigma") == "B":
            z[shifted] = z[shifted] @ np.linalg.cholesky(equicorrelation(d, 0.9)).T
        z[shifted] += mu
        x = z
    elif f == "t":
        nu = spec.param("nu")
        z = rng.standard_normal((n, d))
        w = rng.chisquare(nu, n)
        x = z / np.sqrt(w / nu)[:, None]
    elif f == "iid":
        x = spec.param("dist").draw(rng, (n, d))
    elif f == "spherical":
        u = _uniform_sphere(rng, n, d)
        x = spec.param("radial").draw(rng, n)[:, None] * u
    elif f == "mar":
        x = rng.standard_normal((n, d))
        x[:, -1] = spec.param("dist").draw(rng, n)
    elif f == "nm":
        th = spec.param("theta")
        z = rng.standard_normal((n, d))
        lp = np.linalg.cholesky(equicorrelation(d, th))
        lm = np.linalg.cholesky(equicorrelation(d, -th))
        first = rng.random(n) < 0.5
        x = np.where(first[:, None], z @ lp.T, z @ lm.T)
    elif f == "sabsnorm":
        z = np.abs(rng.standard_normal((n, d)))
        sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        x = sign[:, None] * z
    else:  # pragma: no cover
        raise SpecError(f)
    return Sample(x)


def null_reference(d: int, n: int, rng: np.random.Generator) -> Sample:
    """Draws from N_d((1, ..., d), Sigma_0.5): a non-standard normal law."""
    mu = np.arange(1, d + 1, dtype=float)
    chol = np.linalg.cholesky(equicorrelation(d, 0.5))
    return Sample(mu + rng.standard_normal((n, d)) @ chol.T)
