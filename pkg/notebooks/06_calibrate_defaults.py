"""
Calibrating the repository-default constants
============================================

The tail bound and the two sample-size formulas are only stated up to
constants. This script fits every constant once and writes them to
``src/collision/defaults.json``. Calibration runs use their own seeds, so the
acceptance suite later checks the committed values on fresh randomness.

Run from the repository root::

    python notebooks/06_calibrate_defaults.py
"""

# %%
import json
from pathlib import Path

from collision.harness import ExperimentConfig, calibrate_constants, fit_sample_constant
from collision.moments import fit_bin_moment_constants

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

# %%
# Per-bin moment bound: the smallest common C1 = C2 (10% grid) that dominates
# the exact moments for n <= 100, np in [0.01, 50], even d <= 12.
C1, C2 = fit_bin_moment_constants()
print("bin moment constants:", C1, C2)

# %%
# Tail envelope: Monte Carlo tails on eight (pmf, n) cells, 4000 trials each.
env = calibrate_constants(ExperimentConfig.from_json(CONFIGS / "calibrate_envelope.json"))
print("envelope:", env)

# %%
# Sample-size constants. Target a failure frequency of delta/4 on the
# calibration seeds so the committed C leaves room for sampling noise.
tester_cfg = ExperimentConfig.from_json(CONFIGS / "calibrate_tester.json")
tester_C = fit_sample_constant([tester_cfg], target_rate=tester_cfg.delta / 4)
print("tester C:", tester_C)

entropy_cfgs = [ExperimentConfig.from_dict(d) for d in json.loads((CONFIGS / "calibrate_entropy.json").read_text())]
entropy_C = fit_sample_constant(entropy_cfgs, target_rate=entropy_cfgs[0].delta / 4)
print("entropy C:", entropy_C)

# %%
defaults = {
    "tester_C": tester_C,
    "entropy_C": entropy_C,
    "bin_moment_C1": C1,
    "bin_moment_C2": C2,
    "symm_diff_C": 1.0,
    "envelope": env.to_dict(),
}
out = ROOT / "src" / "collision" / "defaults.json"
out.write_text(json.dumps(defaults, indent=2) + "\n", encoding="utf-8")
print("wrote", out)
