import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from mvntest.registry import TestSpec, apply_scale, evaluate, scale_factor
from mvntest.weighted_l2 import (
    HJM_MAX_N,
    ParameterError,
    bhep,
    deh,
    deh_star,
    hj,
    hjm,
    hv,
    hz,
    hz_beta,
)

from conftest import residuals
from oracles import INTEGRANDS, boundary_cases, boundary_datasets, quadrature, skew_combo

FUNCS = {"bhep": bhep, "hz": hz, "hj": hj, "hjm": hjm, "hv": hv, "deh": deh, "dehstar": deh_star}


def test_bhep_two_point_hand_value():
    y = np.array([[-1.0], [1.0]])
    ref = 1 + math.exp(-2) - 2 * math.sqrt(2) * math.exp(-0.25) + 2 / math.sqrt(3)
    assert bhep(y, 1.0) == pytest.approx(ref, rel=1e-14)
    assert ref == pytest.approx(0.0872546, abs=5e-8)


@pytest.mark.parametrize("n, d, expected", [(20, 2, 25 ** (1 / 6) / math.sqrt(2)),
                                            (50, 3, 87.5 ** (1 / 7) / math.sqrt(2))])
def test_hz_bandwidth(n, d, expected):
    assert hz_beta(n, d) == pytest.approx(expected, rel=1e-15)


def test_hz_bandwidth_values():
    # four printed decimals
    assert hz_beta(20, 2) == pytest.approx(1.2090, abs=2e-4)
    assert hz_beta(50, 3) == pytest.approx(1.3394, abs=1e-4)


def test_hz_delegates_to_bhep():
    y = residuals(20, 2, 3)
    assert hz(y) == bhep(y, hz_beta(20, 2))


@pytest.mark.parametrize("name", list(INTEGRANDS))
@pytest.mark.parametrize("d", [1, 2])
def test_quadrature(name, d):
    y = residuals(5, d, 11, "chisq").y
    assert FUNCS[name](y) == pytest.approx(quadrature(name, y), rel=1e-8)


@pytest.mark.parametrize("name", ["bhep", "hj", "hjm", "hv"])
def test_quadrature_nondefault_parameter(name):
    y = residuals(4, 1, 2).y
    param = {"bhep": 0.4, "hj": 3.0, "hjm": 2.5, "hv": 2.5}[name]
    assert FUNCS[name](y, param) == pytest.approx(quadrature(name, y, param), rel=1e-8)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_boundary_trends(d):
    y = boundary_datasets(d, count=1)[0]
    for label, seq, err in boundary_cases(y):
        e = [err(p) for p in seq]
        assert all(a > b for a, b in zip(e, e[1:])), (label, e)
        assert e[-1] < 1e-3, (label, e)


def test_hj_limit_constant():
    # the large-gamma limit of gamma^{3+d/2} HJ / pi^{d/2} is combo / 8;
    # a factor 6 in place of 8 leaves a ratio of 3/4
    y = boundary_datasets(2, count=1)[0]
    g = 1e5
    ratio = g**4 * 6 * hj(y, g) / math.pi / skew_combo(y)
    assert ratio == pytest.approx(0.75, rel=1e-3)


class TestParameters:
    @pytest.mark.parametrize("fn, bad", [(bhep, 0.0), (hj, 1.0), (hjm, 0.9), (hv, 2.0),
                                         (deh, 0.0), (deh_star, -1.0), (bhep, np.nan)])
    def test_range(self, fn, bad):
        with pytest.raises(ParameterError):
            fn(residuals(10, 2, 0), bad)

    def test_hjm_guard(self):
        y = residuals(HJM_MAX_N + 1, 1, 0)
        with pytest.raises(ParameterError, match="allow_large"):
            hjm(y)

    def test_hjm_chunking_is_exact(self):
        y = residuals(30, 2, 4, "t")
        assert hjm(y, chunk=7) == pytest.approx(hjm(y), rel=1e-12)


@pytest.mark.parametrize("name", list(FUNCS))
def test_weights_equal_duplicated_rows(name):
    y = residuals(8, 2, 6, "chisq").y
    counts = np.array([1, 3, 1, 2, 1, 1, 4, 1])
    dup = np.repeat(y, counts, axis=0)
    dup = dup - dup.mean(axis=0)
    root = np.linalg.inv(np.linalg.cholesky(dup.T @ dup / len(dup))).T
    dup = dup @ root
    # restandardized duplicated data is a rotation of the weighted residuals
    rows, idx = np.unique(dup, axis=0, return_index=True)
    w = np.bincount(np.unique(dup, axis=0, return_inverse=True)[1].ravel()).astype(float)
    assert FUNCS[name](rows, weights=w) == pytest.approx(FUNCS[name](dup), rel=1e-10)


@pytest.mark.parametrize("name", list(FUNCS))
def test_rotation_invariance(name):
    y = residuals(15, 3, 8, "t").y
    q, _ = np.linalg.qr(np.random.default_rng(1).standard_normal((3, 3)))
    assert FUNCS[name](y @ q) == pytest.approx(FUNCS[name](y), rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), d=st.integers(1, 3), n=st.integers(5, 25))
def test_nonnegative_finite(seed, d, n):
    y = residuals(max(n, d + 2), d, seed, "chisq")
    for fn in FUNCS.values():
        v = fn(y)
        assert np.isfinite(v) and v >= 0


def test_heavy_tails_stay_finite():
    # exponentials of ||Y_j + Y_k||^2 / (4 gamma) are large here; log-space
    # evaluation keeps the result finite
    y = residuals(60, 2, 3, "t")
    for g in (1.05, 1.5):
        assert np.isfinite(hj(y, g)) and hj(y, g) > 0
        assert np.isfinite(hjm(y, g)) and hjm(y, g) > 0


class TestScale:
    def test_identity_conventions(self):
        for name in ("bhep", "hz", "b1", "energy", "pu", "cs", "mq1"):
            assert scale_factor(TestSpec.parse(name), 2) == 1.0
        assert apply_scale(0.54, TestSpec.parse("bhep"), 2) == 0.54

    def test_hj(self):
        assert apply_scale(2.0, TestSpec.parse("hj"), 2) == pytest.approx(2.0 / math.pi)

    def test_deh(self):
        assert apply_scale(1.0, TestSpec.parse("deh:gamma=0.25"), 2) == pytest.approx(0.25 / math.pi / 4)

    def test_hv_hjm_dehstar(self):
        assert scale_factor(TestSpec.parse("hv:gamma=5"), 2) == pytest.approx(16 * 5**3 / math.pi)
        assert scale_factor(TestSpec.parse("hjm"), 3) == pytest.approx((1.5 / math.pi) ** 1.5)
        assert scale_factor(TestSpec.parse("dehstar"), 2) == pytest.approx(0.5 / math.pi / 4)

    def test_raw_and_scaled_interconvert(self):
        spec = TestSpec.parse("hv")
        y = residuals(20, 2, 1)
        raw = evaluate(spec, y)
        assert apply_scale(raw, spec, 2) / scale_factor(spec, 2) == pytest.approx(raw, rel=1e-15)
