"""Monte Carlo engine: null critical values, empirical power and p-values.

Replication ``i`` of a run draws its sample from the stream
``(seed, source/d/n, i)``. The statistics of one replication therefore do
not depend on which other tests are evaluated alongside, on the worker
that computes them, or on the number of workers; results are assembled in
replication order before any quantile is taken.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .alternatives import AlternativeSpec, parse_alternative, sample_alternative
from .registry import TestSpec, evaluate, scale_factor
from .rng import stream
from .sample import Sample, standardize
from .search import SearchWarning

__all__ = [
    "ENGINE_VERSION",
    "QUANTILE_RULE",
    "ConfigError",
    "SimulationError",
    "SimulationConfig",
    "CriticalValueRecord",
    "simulate_statistics",
    "upper_quantile",
    "critical_value",
    "critical_values",
    "empirical_power",
    "power_study",
    "mc_pvalue",
    "default_reps",
]

ENGINE_VERSION = "1.0"
QUANTILE_RULE = "order statistic ceil((1-alpha) R); two-sided: alpha/2 per tail"

#: replication budget multiplier for HJM relative to the other tests
HJM_REPS_FRACTION = 0.1


class ConfigError(ValueError):
    """Inconsistent simulation settings."""


class SimulationError(RuntimeError):
    """A statistic failed inside a Monte Carlo replication."""


def default_reps(test: TestSpec, reps: int) -> int:
    """Per-test replication budget: HJM gets a tenth (at least 100)."""
    if test.name == "hjm":
        return max(100, int(math.ceil(reps * HJM_REPS_FRACTION)))
    return reps


@dataclass(frozen=True)
class SimulationConfig:
    """Settings of one critical-value simulation.

    ``threads`` is only a hint for the worker pool and is not part of the
    cache key: results do not depend on it.
    """

    test: TestSpec
    d: int
    n: int
    alpha: float = 0.05
    reps: int = 10000
    seed: int = 0
    threads: int = field(default=1, compare=False)

    def __post_init__(self):
        if not isinstance(self.test, TestSpec):
            object.__setattr__(self, "test", TestSpec.parse(str(self.test)))
        if self.reps < 100:
            raise ConfigError("reps must be at least 100")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.d < 1 or self.n < self.d + 1:
            raise ConfigError(f"need d >= 1 and n >= d + 1, got d={self.d}, n={self.n}")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if self.threads < 1:
            raise ConfigError("threads must be positive")

    def key(self) -> dict:
        return {
            "test": str(self.test),
            "d": self.d,
            "n": self.n,
            "alpha": self.alpha,
            "reps": self.reps,
            "seed": self.seed,
            "source": "normal",
            "scale": scale_factor(self.test, self.d),
            "rule": QUANTILE_RULE,
            "engine": ENGINE_VERSION,
        }

    def digest(self) -> str:
        text = json.dumps(self.key(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


@dataclass(frozen=True, eq=False)
class CriticalValueRecord:
    """Empirical null quantile(s) of a scaled statistic.

    ``upper`` is the (1 - alpha) quantile, or the (1 - alpha/2) quantile for
    a two-sided test, in which case ``lower`` holds the alpha/2 quantile.
    ``null_values`` keeps the sorted scaled null statistics for p-values.
    """

    config: SimulationConfig
    upper: float
    lower: float | None
    scale: float
    null_values: np.ndarray = field(repr=False)
    wall_clock: float = 0.0
    engine_version: str = ENGINE_VERSION
    cache_hit: bool = False

    @property
    def quantile(self) -> float:
        return self.upper

    def rejects(self, scaled) -> np.ndarray | bool:
        scaled = np.asarray(scaled, dtype=float)
        out = scaled > self.upper
        if self.lower is not None:
            out = out | (scaled < self.lower)
        return bool(out) if out.ndim == 0 else out

    def to_json(self) -> str:
        body = {
            "config": self.config.key(),
            "upper": self.upper,
            "lower": self.lower,
            "scale": self.scale,
            "wall_clock_seconds": self.wall_clock,
            "engine_version": self.engine_version,
            "null_values": [float(v) for v in self.null_values],
        }
        return json.dumps(body, indent=1)

    @classmethod
    def from_json(cls, text: str, config: SimulationConfig) -> "CriticalValueRecord":
        body = json.loads(text)
        if body.get("config") != config.key():
            raise ConfigError("cache entry does not match the requested configuration")
        vals = np.array(body["null_values"], dtype=float)
        vals.setflags(write=False)
        return cls(config, float(body["upper"]),
                   None if body["lower"] is None else float(body["lower"]),
                   float(body["scale"]), vals, float(body["wall_clock_seconds"]),
                   body["engine_version"], cache_hit=True)


def upper_quantile(values, alpha: float) -> float:
    """Order statistic of rank ceil((1 - alpha) R) (1-based)."""
    v = np.sort(np.asarray(values, dtype=float))
    r = v.size
    k = int(math.ceil(round((1.0 - alpha) * r, 9)))
    return float(v[min(max(k, 1), r) - 1])


def _lower_quantile(values, alpha):
    # rejection below the order statistic of rank floor(alpha R) + 1
    v = np.sort(np.asarray(values, dtype=float))
    k = int(math.floor(round(alpha * v.size, 9)))
    return float(v[min(k, v.size - 1)])


def _source_tag(source, d, n):
    return f"{source}|d={d}|n={n}"


def _draw(source: AlternativeSpec, d, n, seed, i):
    rng = stream(seed, _source_tag(source, d, n), i)
    return sample_alternative(source, d, n, rng)


def _run_chunk(job):
    tests, source, d, n, seed, start, stop, budgets = job
    tests = [TestSpec.parse(t) for t in tests]
    source = parse_alternative(source)
    out = np.full((stop - start, len(tests)), np.nan)
    with threadpool_limits(limits=1), warnings.catch_warnings():
        warnings.simplefilter("ignore", SearchWarning)
        for row, i in enumerate(range(start, stop)):
            sample = _draw(source, d, n, seed, i)
            try:
                y = standardize(sample)
            except Exception as exc:
                raise SimulationError(
                    f"replication {i} (seed {seed}, {source}, d={d}, n={n}): {exc}"
                ) from exc
            for col, t in enumerate(tests):
                if i >= budgets[col]:
                    continue
                try:
                    out[row, col] = evaluate(t, y, allow_large=True)
                except Exception as exc:
                    raise SimulationError(
                        f"replication {i} (seed {seed}, {source}, d={d}, n={n}) of {t}: {exc}"
                    ) from exc
    return out


def _chunks(total, threads):
    size = max(1, min(500, int(math.ceil(total / (4 * threads)))))
    return [(s, min(total, s + size)) for s in range(0, total, size)]


def simulate_statistics(
    tests,
    d: int,
    n: int,
    reps: int,
    seed: int,
    source: AlternativeSpec | str = "normal",
    threads: int = 1,
    budgets=None,
) -> dict:
    """Raw statistics of ``reps`` samples from ``source``, per test.

    ``budgets`` optionally caps the number of replications per test (the
    first ``budgets[t]`` replications are used). Returns a dict mapping
    each TestSpec to a float array in replication order.
    """
    tests = [t if isinstance(t, TestSpec) else TestSpec.parse(t) for t in tests]
    src = source if isinstance(source, AlternativeSpec) else parse_alternative(source)
    src.check_dimension(d)
    budgets = [int(min(reps, (budgets or {}).get(t, reps))) for t in tests]
    total = max(budgets)
    jobs = [([str(t) for t in tests], str(src), d, n, seed, a, b, budgets)
            for a, b in _chunks(total, threads)]
    if threads == 1 or len(jobs) == 1:
        parts = [_run_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    mat = np.vstack(parts)
    return {t: mat[: budgets[c], c].copy() for c, t in enumerate(tests)}


def _record(cfg: SimulationConfig, raw, seconds):
    f = scale_factor(cfg.test, cfg.d)
    vals = np.sort(np.asarray(raw) * f)
    vals.setflags(write=False)
    if cfg.test.two_sided:
        upper = upper_quantile(vals, cfg.alpha / 2)
        lower = _lower_quantile(vals, cfg.alpha / 2)
    else:
        upper, lower = upper_quantile(vals, cfg.alpha), None
    if not np.isfinite(upper):
        raise SimulationError(f"non-finite critical value for {cfg.test}")
    return CriticalValueRecord(cfg, upper, lower, f, vals, seconds)


def _cache_path(cache, cfg):
    return Path(cache) / f"{cfg.digest()}.json"


def _load(cache, cfg):
    if cache is None:
        return None
    path = _cache_path(cache, cfg)
    if not path.exists():
        return None
    try:
        return CriticalValueRecord.from_json(path.read_text(encoding="utf-8"), cfg)
    except (ConfigError, ValueError, KeyError):
        return None


def _store(cache, rec):
    if cache is None:
        return
    path = _cache_path(cache, rec.config)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(f".tmp{os.getpid()}")
    tmp.write_text(rec.to_json(), encoding="utf-8")
    os.replace(tmp, path)


def critical_value(cfg: SimulationConfig, cache=None) -> CriticalValueRecord:
    """Empirical null quantile for one test, using the cache if possible."""
    return critical_values([cfg.test], cfg.d, cfg.n, cfg.alpha, {cfg.test: cfg.reps},
                           cfg.seed, cfg.threads, cache)[cfg.test]


def critical_values(tests, d, n, alpha=0.05, reps=10000, seed=0, threads=1, cache=None) -> dict:
    """Critical values for several tests from one shared null simulation.

    ``reps`` is an int or a dict test -> replications. Cached records are
    reused; the remaining tests are simulated together.
    """
    tests = [t if isinstance(t, TestSpec) else TestSpec.parse(t) for t in tests]
    per = {t: (reps[t] if isinstance(reps, dict) else reps) for t in tests}
    cfgs = {t: SimulationConfig(t, d, n, alpha, per[t], seed, threads) for t in tests}
    out = {}
    todo = []
    for t in tests:
        rec = _load(cache, cfgs[t])
        if rec is None:
            todo.append(t)
        else:
            out[t] = rec
    if todo:
        t0 = time.perf_counter()
        raw = simulate_statistics(todo, d, n, max(per[t] for t in todo), seed,
                                  "normal", threads, budgets={t: per[t] for t in todo})
        seconds = time.perf_counter() - t0
        for t in todo:
            rec = _record(cfgs[t], raw[t], seconds)
            _store(cache, rec)
            out[t] = rec
    return {t: out[t] for t in tests}


def power_study(tests, alt, d, n, crits: dict, reps=10000, seed=0, threads=1, budgets=None) -> dict:
    """Rejection rates of several tests against one alternative (shared samples)."""
    tests = [t if isinstance(t, TestSpec) else TestSpec.parse(t) for t in tests]
    alt = alt if isinstance(alt, AlternativeSpec) else parse_alternative(alt)
    for t in tests:
        c = crits[t].config
        if (c.d, c.n) != (d, n) or c.test != t:
            raise ConfigError(f"critical value for {c.test} (d={c.d}, n={c.n}) does not match "
                              f"{t} at d={d}, n={n}")
    raw = simulate_statistics(tests, d, n, reps, seed, alt, threads, budgets)
    return {t: float(np.mean(crits[t].rejects(raw[t] * crits[t].scale))) for t in tests}


def empirical_power(test, alt, n, crit: CriticalValueRecord, reps=10000, seed=0, threads=1) -> float:
    """Fraction of samples from ``alt`` whose scaled statistic is rejected."""
    test = test if isinstance(test, TestSpec) else TestSpec.parse(test)
    return power_study([test], alt, crit.config.d, n, {test: crit}, reps, seed, threads)[test]


def mc_pvalue(test, sample, reps=10000, seed=0, threads=1, cache=None, alpha=0.05) -> float:
    """Monte Carlo p-value ``(1 + #{null >= observed}) / (R + 1)``.

    The two-sided kurtosis test doubles the smaller tail probability
    (capped at 1). The null statistics are those of :func:`critical_value`.
    """
    test = test if isinstance(test, TestSpec) else TestSpec.parse(test)
    sample = sample if isinstance(sample, Sample) else Sample(sample)
    rec = critical_value(SimulationConfig(test, sample.d, sample.n, alpha, reps, seed, threads), cache)
    obs = evaluate(test, standardize(sample), allow_large=True) * rec.scale
    return pvalue_from_null(obs, rec.null_values, test.two_sided)


def pvalue_from_null(obs: float, null_values, two_sided: bool = False) -> float:
    v = np.asarray(null_values, dtype=float)
    r = v.size
    upper = (1.0 + np.count_nonzero(v >= obs)) / (r + 1.0)
    if not two_sided:
        return float(upper)
    lower = (1.0 + np.count_nonzero(v <= obs)) / (r + 1.0)
    return float(min(1.0, 2.0 * min(upper, lower)))
