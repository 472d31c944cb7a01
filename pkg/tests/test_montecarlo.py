import numpy as np
import pytest
from numpy.testing import assert_array_equal
from scipy import stats

from mvntest.montecarlo import (
    ConfigError,
    CriticalValueRecord,
    SimulationConfig,
    critical_value,
    critical_values,
    default_reps,
    empirical_power,
    mc_pvalue,
    power_study,
    pvalue_from_null,
    simulate_statistics,
    upper_quantile,
)
from mvntest.registry import TestSpec

CHEAP = [TestSpec.parse(t) for t in ("b1", "b2", "hz", "energy")]


def test_upper_quantile_rule():
    v = np.arange(1, 101, dtype=float)[::-1]
    assert upper_quantile(v, 0.05) == 95.0  # rank ceil(0.95 * 100)
    assert upper_quantile(np.arange(1, 11), 0.05) == 10.0  # rank ceil(9.5)
    assert upper_quantile(np.arange(1, 21), 0.05) == 19.0


def test_thread_count_does_not_change_results():
    a = simulate_statistics(CHEAP, 2, 15, 120, seed=3, threads=1)
    b = simulate_statistics(CHEAP, 2, 15, 120, seed=3, threads=4)
    for t in CHEAP:
        assert_array_equal(a[t], b[t])


def test_budgets_use_leading_replications():
    full = simulate_statistics(CHEAP, 2, 12, 200, seed=1)
    part = simulate_statistics(CHEAP, 2, 12, 200, seed=1, budgets={CHEAP[2]: 100})
    assert part[CHEAP[2]].size == 100
    assert_array_equal(part[CHEAP[2]], full[CHEAP[2]][:100])
    assert_array_equal(part[CHEAP[0]], full[CHEAP[0]])


def test_default_reps():
    assert default_reps(TestSpec("hjm"), 10000) == 1000
    assert default_reps(TestSpec("hjm"), 200) == 100
    assert default_reps(TestSpec("hz"), 10000) == 10000


@pytest.mark.parametrize("kw", [dict(reps=99), dict(alpha=0.0), dict(alpha=1.0), dict(n=2),
                                dict(seed=-1), dict(threads=0)])
def test_config_validation(kw):
    base = dict(test=TestSpec("hz"), d=2, n=10, alpha=0.05, reps=100, seed=0)
    base.update(kw)
    with pytest.raises(ConfigError):
        SimulationConfig(**base)


def test_threads_not_in_key():
    a = SimulationConfig(TestSpec("hz"), 2, 10, threads=1)
    b = SimulationConfig(TestSpec("hz"), 2, 10, threads=8)
    assert a == b and a.digest() == b.digest()
    assert a.digest() != SimulationConfig(TestSpec("hz"), 2, 10, seed=1).digest()


def test_two_sided_record():
    rec = critical_value(SimulationConfig(TestSpec("b2"), 2, 20, 0.05, 400, 5))
    v = rec.null_values
    assert rec.lower is not None and rec.lower < rec.upper
    assert rec.upper == upper_quantile(v, 0.025)
    assert rec.rejects(rec.upper + 1) and rec.rejects(rec.lower - 1)
    assert not rec.rejects(0.5 * (rec.lower + rec.upper))
    rate = np.mean(rec.rejects(v))
    assert 0.03 <= rate <= 0.05


def test_cache_round_trip(tmp_path):
    cfg = SimulationConfig(TestSpec("hz"), 2, 15, 0.05, 150, 2)
    first = critical_value(cfg, cache=tmp_path)
    assert not first.cache_hit
    second = critical_value(cfg, cache=tmp_path)
    assert second.cache_hit
    assert second.upper == first.upper
    assert_array_equal(second.null_values, first.null_values)
    other = SimulationConfig(TestSpec("hz"), 2, 15, 0.05, 150, 3)
    with pytest.raises(ConfigError):
        CriticalValueRecord.from_json(first.to_json(), other)


def test_corrupt_cache_is_recomputed(tmp_path):
    cfg = SimulationConfig(TestSpec("b1"), 2, 12, 0.05, 100, 0)
    rec = critical_value(cfg, cache=tmp_path)
    (tmp_path / f"{cfg.digest()}.json").write_text("{not json")
    again = critical_value(cfg, cache=tmp_path)
    assert not again.cache_hit and again.upper == rec.upper


def test_pvalue_definition_and_monotonicity():
    null = np.arange(1.0, 101.0)
    assert pvalue_from_null(100.5, null) == pytest.approx(1 / 101)
    assert pvalue_from_null(0.0, null) == 1.0
    assert pvalue_from_null(95.0, null) == pytest.approx(7 / 101)
    ps = [pvalue_from_null(x, null) for x in np.linspace(-5, 110, 50)]
    assert all(a >= b for a, b in zip(ps, ps[1:]))
    assert pvalue_from_null(50.0, null, two_sided=True) == 1.0
    assert pvalue_from_null(1.0, null, two_sided=True) == pytest.approx(2 * 2 / 101)


def test_pvalue_uniform_under_null():
    rng = np.random.default_rng(0)
    null = rng.standard_normal(199)
    obs = rng.standard_normal(3000)
    p = np.array([pvalue_from_null(o, null) for o in obs])
    # discrete uniform on {k/200}; compare with its cdf
    ks = stats.kstest(p, lambda x: np.clip(np.floor(x * 200) / 200, 0, 1))
    assert ks.statistic < 0.05


def test_mc_pvalue_matches_record():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((20, 2))
    p = mc_pvalue("hz", x, reps=200, seed=4)
    assert 1 / 201 <= p <= 1
    heavy = rng.standard_t(1, (20, 2))
    assert mc_pvalue("hz", heavy, reps=200, seed=4) < 0.05


def test_power_mismatch_raises():
    crits = critical_values(["hz"], 2, 15, 0.05, 100, 0)
    with pytest.raises(ConfigError):
        power_study(["hz"], "t:nu=3", 2, 20, crits, reps=100)
    with pytest.raises(KeyError):
        power_study(["b1"], "t:nu=3", 2, 15, crits, reps=100)


def test_power_against_gross_alternative():
    crits = critical_values(CHEAP, 2, 30, 0.05, 300, 0)
    rates = power_study(CHEAP, "iid:dist=exp(1)", 2, 30, crits, reps=200, seed=1)
    assert all(rates[t] > 0.5 for t in (CHEAP[0], CHEAP[2], CHEAP[3]))
    assert empirical_power("hz", "iid:dist=exp(1)", 30, crits[CHEAP[2]], 200, 1) == rates[CHEAP[2]]


def test_null_reference_level_small():
    crits = critical_values(["hz"], 2, 20, 0.05, 1000, 0)
    rate = power_study(["hz"], "null-reference", 2, 20, crits, reps=1000, seed=9)
    assert abs(rate[TestSpec("hz")] - 0.05) < 4 * np.sqrt(0.05 * 0.95 / 1000) + 0.02
