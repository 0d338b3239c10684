"""
Is the median trick needed?
===========================

With an exponential tail, one run on the full sample budget already has a
small error probability. Splitting the budget into k runs and taking the
median of their estimates spends the same samples less well.
"""

# %%
from collision.harness import ExperimentConfig, run_boosting_comparison

# %%
for k in (3, 9):
    cfg = ExperimentConfig(kind="boosting", m=2500, epsilons=[0.5], delta=0.1, k=k, trials=400, seed=5)
    report = run_boosting_comparison(cfg)
    print(f"k = {k}")
    for row in report.rows:
        print(
            f"  case {row['case']} {row['method']:6s} n/run = {row['n_per_run']:4d}"
            f"  error rate {row['frequency']:.4f}  [{row['wilson_lo']:.4f}, {row['wilson_hi']:.4f}]"
        )
