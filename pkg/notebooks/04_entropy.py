"""
Collision entropy from a sample
===============================

-log2 q_hat estimates the Renyi entropy of order 2. Relative accuracy eps on
Q takes about 1/(sqrt(Q) eps^2) samples, so concentrated distributions need
fewer samples.
"""

# %%
import math

from collision import (
    SampleSeed,
    collision_probability,
    entropy_estimate,
    entropy_sample_size,
    load_defaults,
    sample_histogram,
    uniform,
    zipf,
)

# %%
C = load_defaults().entropy_C
eps, delta = 0.2, 0.1
for name, pmf in [("uniform(100)", uniform(100)), ("uniform(10000)", uniform(10_000)), ("zipf(1000, 1.5)", zipf(1000, 1.5))]:
    Q = collision_probability(pmf)
    n = entropy_sample_size(Q, eps, delta, C)
    estimates = [entropy_estimate(sample_histogram(pmf, n, SampleSeed(4, t))) for t in range(200)]
    within = sum(abs(2.0**-h - Q) <= eps * Q for h in estimates)
    print(f"{name:16s} H2 = {-math.log2(Q):6.3f} bits  n = {n:6d}  mean estimate {sum(estimates) / 200:6.3f}  within eps: {within}/200")
