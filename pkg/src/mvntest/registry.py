"""Test identifiers, tuning parameters and reporting scale conventions.

A :class:`TestSpec` names one statistic together with its tuning
parameters and has a canonical text form such as ``"bhep:beta=1"`` or
``"hj:gamma=1.5"``; parsing and formatting are inverse to each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import energy as _energy
from . import harmonics as _harm
from . import moment as _mom
from . import pudelko as _pu
from . import weighted_l2 as _wl2
from .sample import ScaledResiduals, as_residuals, standardize
from .search import SphereSearchConfig

__all__ = [
    "SpecError",
    "TestSpec",
    "STATISTICS",
    "parse_test",
    "parse_tests",
    "default_battery",
    "evaluate",
    "statistic",
    "scale_factor",
    "apply_scale",
    "WEIGHTED_L2",
]


class SpecError(ValueError):
    """Malformed test or alternative specification."""


@dataclass(frozen=True)
class _Stat:
    label: str
    params: tuple = ()  # ((name, default, lower bound exclusive), ...)
    kind: str = "moment"


STATISTICS = {
    "b1": _Stat("b1"),
    "b2": _Stat("b2"),
    "b1m": _Stat("b1M"),
    "b2t": _Stat("b2~"),
    "b1t": _Stat("b1~"),
    "b2m": _Stat("b2M"),
    "bhep": _Stat("BHEP", (("beta", 1.0, 0.0),), "weighted-l2"),
    "hz": _Stat("HZ", (), "weighted-l2"),
    "hv": _Stat("HV", (("gamma", 5.0, 2.0),), "weighted-l2"),
    "hj": _Stat("HJ", (("gamma", 1.5, 1.0),), "weighted-l2"),
    "hjm": _Stat("HJM", (("gamma", 1.5, 1.0),), "weighted-l2"),
    "deh": _Stat("DEH", (("gamma", 0.25, 0.0),), "weighted-l2"),
    "dehstar": _Stat("DEH*", (("gamma", 0.5, 0.0),), "weighted-l2"),
    "energy": _Stat("E", (), "other"),
    "mq1": _Stat("MQ(f1)", (), "other"),
    "mq2": _Stat("MQ(f2)", (), "other"),
    "cs": _Stat("CS", (), "search"),
    "pu": _Stat("PU", (("r", 2.0, 0.0),), "search"),
}

WEIGHTED_L2 = frozenset(k for k, v in STATISTICS.items() if v.kind == "weighted-l2")

_DEFAULT_ORDER = (
    "b1", "b2", "b1m", "b2t", "b1t", "b2m", "bhep", "hz", "hv", "hj", "hjm",
    "deh", "dehstar", "energy", "mq1", "mq2", "cs", "pu",
)


def _fmt_number(v: float) -> str:
    v = float(v)
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


@dataclass(frozen=True)
class TestSpec:
    """A statistic identifier plus its tuning parameters."""

    __test__ = False  # keep pytest from collecting this class

    name: str
    params: tuple = field(default=())

    def __post_init__(self):
        if self.name not in STATISTICS:
            raise SpecError(f"unknown statistic {self.name!r}; known: {', '.join(STATISTICS)}")
        given = dict(self.params)
        allowed = {p[0]: p for p in STATISTICS[self.name].params}
        extra = set(given) - set(allowed)
        if extra:
            raise SpecError(f"{self.name}: unexpected parameter(s) {sorted(extra)}")
        full = []
        for pname, default, lower in STATISTICS[self.name].params:
            v = float(given.get(pname, default))
            if not (math.isfinite(v) and v > lower):
                raise SpecError(f"{self.name}: {pname} must exceed {lower:g}, got {v!r}")
            full.append((pname, v))
        object.__setattr__(self, "params", tuple(full))

    def param(self, key: str) -> float:
        return dict(self.params)[key]

    @property
    def kind(self) -> str:
        return STATISTICS[self.name].kind

    @property
    def two_sided(self) -> bool:
        return self.name == "b2"

    @property
    def label(self) -> str:
        base = STATISTICS[self.name].label
        if self.params:
            base += "_" + ",".join(_fmt_number(v) for _, v in self.params)
        return base

    def __str__(self) -> str:
        if not self.params:
            return self.name
        return self.name + ":" + ",".join(f"{k}={_fmt_number(v)}" for k, v in self.params)

    @classmethod
    def parse(cls, text: str) -> "TestSpec":
        text = text.strip().lower()
        name, _, rest = text.partition(":")
        params = []
        if rest:
            for item in rest.split(","):
                key, eq, val = item.partition("=")
                if not eq:
                    raise SpecError(f"malformed parameter {item!r} in {text!r}")
                try:
                    params.append((key.strip(), float(val)))
                except ValueError:
                    raise SpecError(f"parameter {key!r} in {text!r} is not a number") from None
        return cls(name.strip(), tuple(params))


def parse_test(text: str) -> TestSpec:
    return TestSpec.parse(text)


def parse_tests(text: str, n: int | None = None) -> list[TestSpec]:
    """Semicolon- or whitespace-separated list, e.g. ``"hz;bhep:beta=2;energy"``.

    The token ``default`` expands to :func:`default_battery` for sample size n.
    """
    out = []
    for item in text.replace(";", " ").split():
        if item.lower() == "default":
            out.extend(default_battery(n))
        else:
            out.append(TestSpec.parse(item))
    if not out:
        raise SpecError("empty test list")
    return out


def default_battery(n: int | None = None) -> list[TestSpec]:
    """The 18 tests with their standard tunings; HJM is left out for n > 200."""
    out = [TestSpec(k) for k in _DEFAULT_ORDER]
    if n is not None and n > _wl2.HJM_MAX_N:
        out = [t for t in out if t.name != "hjm"]
    return out


def _dispatch(spec: TestSpec, y, weights, cfg, allow_large):
    p = dict(spec.params)
    name = spec.name
    if weights is not None and name not in WEIGHTED_L2:
        raise SpecError(f"{name} does not accept row weights")
    if name == "b1":
        return _mom.mardia_skewness(y)
    if name == "b2":
        return _mom.mardia_kurtosis(y)
    if name == "b1t":
        return _mom.mrs_skewness(y)
    if name == "b2t":
        return _mom.koziol_kurtosis(y)
    if name == "b1m":
        return _mom.malkovich_afifi_skewness(y, cfg)
    if name == "b2m":
        return _mom.malkovich_afifi_kurtosis(y, cfg)
    if name == "cs":
        return _mom.cox_small(y, cfg)
    if name == "bhep":
        return _wl2.bhep(y, p["beta"], weights=weights)
    if name == "hz":
        return _wl2.hz(y, weights=weights)
    if name == "hv":
        return _wl2.hv(y, p["gamma"], weights=weights)
    if name == "hj":
        return _wl2.hj(y, p["gamma"], weights=weights)
    if name == "hjm":
        return _wl2.hjm(y, p["gamma"], weights=weights, allow_large=allow_large)
    if name == "deh":
        return _wl2.deh(y, p["gamma"], weights=weights)
    if name == "dehstar":
        return _wl2.deh_star(y, p["gamma"], weights=weights)
    if name == "energy":
        return _energy.energy(y)
    if name == "mq1":
        return _harm.mq_statistic(y, "f1")
    if name == "mq2":
        return _harm.mq_statistic(y, "f2")
    if name == "pu":
        return _pu.pudelko(y, p["r"], cfg)
    raise SpecError(name)  # pragma: no cover


def evaluate(spec: TestSpec, y, weights=None, cfg: SphereSearchConfig | None = None,
             allow_large: bool = False) -> float:
    """Raw statistic of already standardized residuals ``y``.

    ``allow_large`` lifts the sample-size guard of the O(n^4) HJM statistic.
    """
    return float(_dispatch(spec, as_residuals(y), weights, cfg, allow_large))


def statistic(spec: TestSpec, sample, cfg: SphereSearchConfig | None = None,
              allow_large: bool = False) -> float:
    """Raw statistic of a raw sample (standardizes first)."""
    y = sample if isinstance(sample, ScaledResiduals) else standardize(sample)
    return evaluate(spec, y, cfg=cfg, allow_large=allow_large)


def scale_factor(spec: TestSpec, d: int) -> float:
    """Multiplier turning the raw statistic into the tabulated scale."""
    name = spec.name
    if name == "hv":
        g = spec.param("gamma")
        return 16.0 * g ** (2.0 + 0.5 * d) / math.pi ** (0.5 * d)
    if name == "hj":
        return math.pi ** (-0.5 * d)
    if name == "hjm":
        return (spec.param("gamma") / math.pi) ** (0.5 * d)
    if name in ("deh", "dehstar"):
        return (spec.param("gamma") / math.pi) ** (0.5 * d) / d**2
    return 1.0


def apply_scale(raw, spec: TestSpec, d: int):
    """Raw value(s) times :func:`scale_factor`."""
    f = scale_factor(spec, d)
    if np.ndim(raw):
        return np.asarray(raw, dtype=float) * f
    return float(raw) * f
