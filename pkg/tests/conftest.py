import numpy as np
import pytest

from mvntest.sample import Sample, standardize


def residuals(n, d, seed, law="normal"):
    """Standardized residuals of a fixed pseudo-random sample."""
    rng = np.random.default_rng(seed)
    if law == "normal":
        x = rng.standard_normal((n, d))
    elif law == "chisq":
        x = rng.chisquare(3, (n, d))
    elif law == "t":
        x = rng.standard_t(4, (n, d))
    elif law == "unif":
        x = rng.uniform(size=(n, d))
    else:
        raise ValueError(law)
    return standardize(Sample(x))


def random_affine(rng, d, max_cond=100.0):
    """A random regular matrix with condition number at most max_cond, and a shift."""
    q1, _ = np.linalg.qr(rng.standard_normal((d, d)))
    q2, _ = np.linalg.qr(rng.standard_normal((d, d)))
    s = np.exp(rng.uniform(0.0, np.log(max_cond), d))
    s[0], s[-1] = 1.0, max(s[-1], 1.0)
    a = q1 @ np.diag(s) @ q2
    return a, rng.normal(0.0, 3.0, d)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(number, title, ok, detail=""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  ({detail})"
        _ACCEPTANCE.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
