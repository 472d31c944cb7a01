"""Distance to normality: point estimate, interval and neighborhood test.

The standardized Bernoulli(0.3) law is far from normal; its BHEP distance
is computed by quadrature and compared with the bootstrap interval.
"""

import numpy as np
from scipy.integrate import quad

from mvntest import bootstrap_ci, neighborhood_test

p = 0.3
a, b = np.sqrt((1 - p) / p), -np.sqrt(p / (1 - p))


def integrand(t):
    cf = p * np.exp(1j * t * a) + (1 - p) * np.exp(1j * t * b)
    return abs(cf - np.exp(-t * t / 2)) ** 2 * np.exp(-t * t / 2) / np.sqrt(2 * np.pi)


delta = quad(integrand, -np.inf, np.inf, epsabs=1e-14)[0]
print(f"population distance {delta:.6f}")

rng = np.random.default_rng(3)
for n in (200, 2000, 20000):
    x = (rng.random((n, 1)) < p).astype(float)
    ci = bootstrap_ci("bhep", x, alpha=0.1, reps=200, seed=n)
    res = neighborhood_test("bhep", x, delta0=0.1, reps=200, seed=n)
    print(f"n={n:6d}  estimate {ci.estimate.delta_hat:.5f}  90% interval "
          f"[{ci.lower:.5f}, {ci.upper:.5f}]  within 0.1 of normal: {res.reject}")
