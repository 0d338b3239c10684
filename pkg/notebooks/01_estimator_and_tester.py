"""
Counting collisions
===================

The collision estimator counts ordered pairs of equal draws and divides by
n(n-1). It is unbiased for the collision probability Q = sum p_x^2, and the
tester built on it flags a sample as non-uniform once the estimate exceeds
(1 + eps)/m.

Run from the repository root::

    python notebooks/01_estimator_and_tester.py
"""

# %%
import warnings

from collision import (
    SampleSeed,
    collision_probability,
    estimate_from_histogram,
    estimate_pairwise,
    histogram_of,
    load_defaults,
    planted_bias,
    sample_histogram,
    tester_sample_size,
    uniform,
    uniformity_test,
)

# %%
# A hand-made sample: "a" twice, "b" once gives 2 ordered colliding pairs
# out of 3 * 2 = 6.
sample = ["a", "a", "b"]
print("pairwise  :", estimate_pairwise(sample))
print("histogram :", estimate_from_histogram(histogram_of(sample)))

# %%
# The histogram path only needs counts, so it scales to large alphabets.
m = 10_000
for name, pmf in [("uniform", uniform(m)), ("planted bias 0.5", planted_bias(m, 0.5))]:
    hist = sample_histogram(pmf, 3_000, SampleSeed(1))
    print(f"{name:17s} Q = {collision_probability(pmf):.3e}  q_hat = {estimate_from_histogram(hist).q_hat:.3e}")

# %%
# The tester needs about sqrt(m)/eps samples, far fewer than m.
eps, delta = 0.5, 0.1
n = tester_sample_size(m, eps, delta, C=load_defaults().tester_C)
print(f"m = {m}, eps = {eps}: n = {n} samples")

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    for name, pmf in [("uniform", uniform(m)), ("far from uniform", planted_bias(m, 2 * eps))]:
        votes = [uniformity_test(sample_histogram(pmf, n, SampleSeed(7, t)), m, eps).value for t in range(20)]
        print(f"{name:17s}", {v: votes.count(v) for v in sorted(set(votes))})
