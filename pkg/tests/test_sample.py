import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from mvntest.sample import (
    InputError,
    Sample,
    SingularCovariance,
    inverse_sqrt,
    load_dataset,
    parse_dataset,
    sample_moments,
    standardize,
)


class TestSampleMoments:
    def test_two_points(self):
        mean, cov = sample_moments(Sample([[0.0], [2.0]]))
        assert_allclose(mean, [1.0])
        assert_allclose(cov, [[1.0]])

    def test_signed_axes(self):
        x = np.vstack([np.eye(2), -np.eye(2)])
        mean, cov = sample_moments(Sample(x))
        assert_allclose(mean, 0.0, atol=1e-15)
        assert_allclose(cov, 0.5 * np.eye(2))

    def test_matches_double_loop(self, rng):
        x = rng.standard_normal((50, 3))
        _, cov = sample_moments(Sample(x))
        m = x.mean(axis=0)
        ref = np.zeros((3, 3))
        for row in x:
            for a in range(3):
                for b in range(3):
                    ref[a, b] += (row[a] - m[a]) * (row[b] - m[b])
        assert_allclose(cov, ref / 50, rtol=0, atol=1e-12)

    def test_rejects_non_finite(self):
        with pytest.raises(InputError, match="row 1, column 0"):
            sample_moments(np.array([[0.0, 1.0], [np.nan, 2.0], [1.0, 1.0]]))


class TestInverseSqrt:
    def test_identity(self):
        assert_allclose(inverse_sqrt(np.eye(4)).matrix, np.eye(4), atol=1e-15)

    def test_diagonal(self):
        assert_allclose(inverse_sqrt(np.diag([4.0, 9.0])).matrix, np.diag([0.5, 1 / 3]), atol=1e-15)

    def test_random_spd(self, rng):
        a = rng.standard_normal((5, 5))
        cov = a.T @ a + np.eye(5)
        r = inverse_sqrt(cov).matrix
        assert_allclose(r, r.T, atol=1e-12)
        assert_allclose(r @ r, np.linalg.inv(cov), atol=1e-9)
        assert_allclose(r @ r @ cov, np.eye(5), atol=1e-8)

    def test_singular(self):
        with pytest.raises(SingularCovariance):
            inverse_sqrt(np.array([[1.0, 1.0], [1.0, 1.0]]))

    def test_near_singular_threshold(self):
        with pytest.raises(SingularCovariance):
            inverse_sqrt(np.diag([1.0, 1e-11]))
        inverse_sqrt(np.diag([1.0, 1e-9]))


class TestStandardize:
    def test_two_points(self):
        assert_allclose(standardize(Sample([[0.0], [2.0]])).y, [[-1.0], [1.0]])

    def test_signed_axes(self):
        x = np.vstack([np.eye(2), -np.eye(2)])
        assert_allclose(standardize(Sample(x)).y, np.sqrt(2) * x, atol=1e-14)

    def test_collinear_columns(self, rng):
        x = rng.standard_normal((10, 2))
        x = np.column_stack([x, x[:, 0] - 2 * x[:, 1]])
        with pytest.raises(SingularCovariance):
            standardize(Sample(x))

    def test_too_few_rows(self):
        with pytest.raises(InputError, match="n >= d"):
            Sample(np.ones((2, 2)))

    @settings(max_examples=50, deadline=None)
    @given(n=st.integers(4, 40), d=st.integers(1, 4), seed=st.integers(0, 2**31))
    def test_invariants(self, n, d, seed):
        if n < d + 2:
            n = d + 2
        r = np.random.default_rng(seed)
        x = r.standard_normal((n, d)) * r.uniform(0.1, 100, d) + r.normal(0, 1e3, d)
        y = standardize(Sample(x)).y
        assert_allclose(y.mean(axis=0), 0.0, atol=1e-10)
        assert_allclose(y.T @ y / n, np.eye(d), atol=1e-8)
        # standardizing again leaves the Gram matrix alone
        y2 = standardize(Sample(y)).y
        assert_allclose(y2 @ y2.T, y @ y.T, atol=1e-8)


class TestParsing:
    def test_comma_and_whitespace(self):
        s = parse_dataset("# comment\n1,2\n3 4\n\n5\t7\n")
        assert_allclose(s.data, [[1, 2], [3, 4], [5, 7]])

    def test_header(self):
        s = parse_dataset("a,b\n1,2\n3,4\n0,1\n", header=True)
        assert s.n == 3 and s.d == 2

    def test_non_numeric_cell_cites_position(self):
        with pytest.raises(InputError, match="line 3, column 2"):
            parse_dataset("1,2\n3,4\n5,x\n6,1\n")

    def test_decimal_comma_is_not_a_number(self):
        with pytest.raises(InputError):
            parse_dataset("1;5,2\n3,4\n5,6\n")

    def test_non_finite(self):
        with pytest.raises(InputError, match="non-finite"):
            parse_dataset("1,2\n3,inf\n5,6\n")

    def test_ragged(self):
        with pytest.raises(InputError, match="expected 2 columns"):
            parse_dataset("1,2\n3,4,5\n")

    def test_empty(self):
        with pytest.raises(InputError, match="no observations"):
            parse_dataset("# nothing\n")

    def test_load(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("x,y\n1,0\n0,1\n2,3\n")
        assert load_dataset(p, header=True).n == 3
