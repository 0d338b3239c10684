"""
Tails of the collision estimator
================================

The deviation |q_hat - Q| has a sub-gamma tail with variance factor
v2 = Q/n^2 + P3/n and scale b = max p / n. This script compares a Monte
Carlo tail curve with the envelope evaluated at the committed constants.
"""

# %%
import numpy as np

from collision import load_defaults, scale_param, theorem1_envelope, uniform, variance_proxy, zipf
from collision.harness import ExperimentConfig, run_tail_experiment

# %%
for name, spec, pmf in [
    ("uniform(100)", {"family": "uniform", "m": 100}, uniform(100)),
    ("zipf(200, 1.2)", {"family": "zipf", "m": 200, "s": 1.2}, zipf(200, 1.2)),
]:
    n = 1000
    v = np.sqrt(variance_proxy(pmf, n))
    print(f"{name}: v = {v:.3e}, b = {scale_param(pmf, n):.3e}")
    cfg = ExperimentConfig(
        kind="tail",
        distribution=spec,
        n=n,
        epsilons=[float(v * f) for f in (0.5, 1, 2, 3, 4, 6)],
        trials=3000,
        seed=3,
    )
    report = run_tail_experiment(cfg)
    print("  eps/v   freq     wilson_hi  envelope")
    for row in report.rows:
        print(f"  {row['epsilon'] / v:5.1f}   {row['frequency']:.4f}   {row['wilson_hi']:.4f}     {row['envelope']:.4f}")

# %%
# The envelope is a min of three branches; print which one binds.
env = load_defaults().envelope
pmf, n = uniform(100), 2000
v2, b = variance_proxy(pmf, n), scale_param(pmf, n)
for eps in (1e-4, 1e-3, 1e-2):
    branches = {
        "square": env.c_sq * eps**2 / v2,
        "linear": env.c_lin * eps / b,
        "heavy": env.c_heavy * n * np.sqrt(eps),
    }
    binding = min(branches, key=branches.get)
    print(f"eps = {eps:g}: binding branch {binding}, envelope {theorem1_envelope(eps, pmf, n, env):.3e}")
