"""Repository-default constants for the O(.) statements, fitted by the harness.

The values live in ``defaults.json`` next to this module; regenerate them with
``notebooks/06_calibrate_defaults.py``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .bounds import TailEnvelope


@dataclass(frozen=True)
class Defaults:
    tester_C: float
    entropy_C: float
    bin_moment_C1: float
    bin_moment_C2: float
    symm_diff_C: float
    envelope: TailEnvelope


@lru_cache(maxsize=1)
def load_defaults() -> Defaults:
    raw = json.loads(resources.files(__package__).joinpath("defaults.json").read_text(encoding="utf-8"))
    return Defaults(
        tester_C=float(raw["tester_C"]),
        entropy_C=float(raw["entropy_C"]),
        bin_moment_C1=float(raw["bin_moment_C1"]),
        bin_moment_C2=float(raw["bin_moment_C2"]),
        symm_diff_C=float(raw["symm_diff_C"]),
        envelope=TailEnvelope.from_dict(raw["envelope"]),
    )
