"""Empirical power of a few tests against a list of alternatives.

Usage: python demos/power_study.py [reps] [n]
"""

import sys

from mvntest import critical_values, power_study

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
n = int(sys.argv[2]) if len(sys.argv) > 2 else 50
tests = ["bhep", "hz", "energy", "mq2", "b1", "b2"]
alternatives = [
    "t:nu=3",
    "nmix:p=0.5,mu=3,sigma=I",
    "iid:dist=unif(0,1)",
    "iid:dist=lnorm(0,0.5)",
    "spherical:radial=exp(1)",
    "mar:dist=chisq(3)",
    "sabsnorm",
    "null-reference",
]

crits = critical_values(tests, 2, n, 0.05, reps, seed=1)
print(f"{'alternative':>26} " + " ".join(f"{t:>7}" for t in tests))
for alt in alternatives:
    rates = power_study(list(crits), alt, 2, n, crits, reps, seed=2)
    print(f"{alt:>26} " + " ".join(f"{100 * r:7.1f}" for r in rates.values()))
