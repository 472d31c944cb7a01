"""Simulate 95% null quantiles of the full battery at d=2.

Usage: python demos/null_quantiles.py [reps] [seed]

HJM is given a tenth of the replications at n=100, where it dominates
the run time. b2 is two-sided; its one-sided 95% quantile is shown.
"""

import sys
import time

from mvntest import TestSpec, critical_values, default_battery
from mvntest.montecarlo import upper_quantile

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
tests = default_battery()

rows = {}
for n in (20, 50, 100):
    t0 = time.perf_counter()
    budgets = {t: reps for t in tests}
    if n == 100:
        budgets[TestSpec("hjm")] = max(100, reps // 10)
    recs = critical_values(tests, 2, n, 0.05, budgets, seed=seed)
    rows[n] = [upper_quantile(recs[t].null_values, 0.05) if t.two_sided else recs[t].upper
               for t in tests]
    print(f"n={n}: {time.perf_counter() - t0:.0f} s", file=sys.stderr)

print(f"{'test':>14} " + " ".join(f"{'n=' + str(n):>10}" for n in rows))
for i, t in enumerate(tests):
    print(f"{t.label:>14} " + " ".join(f"{rows[n][i]:10.4g}" for n in rows))
