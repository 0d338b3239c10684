"""Sub-gamma tail bounds and the tail envelope of the collision estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .distribution import DiscretePmf, collision_probability, power_sum

__all__ = [
    "SubGammaParams",
    "TailEnvelope",
    "aggregate_subgamma",
    "envelope_value",
    "moment_subgamma_check",
    "scale_param",
    "subgamma_tail",
    "theorem1_envelope",
    "variance_proxy",
]


@dataclass(frozen=True)
class SubGammaParams:
    """Variance factor ``v2`` and scale ``b`` of a sub-gamma variable."""

    v2: float
    b: float

    def __post_init__(self):
        if not (self.v2 >= 0 and self.b >= 0):
            raise ValueError(f"sub-gamma parameters must be non-negative, got v2={self.v2}, b={self.b}")


@dataclass(frozen=True)
class TailEnvelope:
    """Constants of ``c_out * exp(-min(c_sq eps^2/v2, c_lin eps/b, c_heavy n sqrt(eps)))``.

    The defaults are conservative placeholders; ``collision.defaults`` holds the
    Monte Carlo calibrated values.
    """

    c_out: float = 2.0
    c_sq: float = 0.25
    c_lin: float = 0.25
    c_heavy: float = 0.25

    def __post_init__(self):
        for name in ("c_out", "c_sq", "c_lin", "c_heavy"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")

    @classmethod
    def from_dict(cls, d: Mapping[str, float]) -> "TailEnvelope":
        return cls(**{k: float(v) for k, v in d.items() if k in ("c_out", "c_sq", "c_lin", "c_heavy")})

    def to_dict(self) -> dict:
        return {"c_out": self.c_out, "c_sq": self.c_sq, "c_lin": self.c_lin, "c_heavy": self.c_heavy}


def _check_n(n: int) -> None:
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")


def variance_proxy(pmf: DiscretePmf, n: int) -> float:
    """``Q/n^2 + sum_x p_x^3 / n``."""
    _check_n(n)
    return collision_probability(pmf) / n**2 + power_sum(pmf, 3) / n


def scale_param(pmf: DiscretePmf, n: int) -> float:
    """``max_x p_x / n``."""
    _check_n(n)
    return pmf.max_prob / n


def subgamma_tail(t: float, params: SubGammaParams) -> float:
    """Two-sided sub-gamma tail ``2 exp(-t^2 / (2 (v2 + b t)))``, clamped to [0, 2]."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t!r}")
    if t == 0:
        return 2.0
    denom = 2.0 * (params.v2 + params.b * t)
    if denom <= 0:
        raise ValueError("degenerate sub-gamma parameters (v2 = b = 0) give no tail bound for t > 0")
    return min(2.0, max(0.0, 2.0 * math.exp(-t * t / denom)))


def aggregate_subgamma(components: Sequence[SubGammaParams]) -> SubGammaParams:
    """Parameters of a sum: variance factors add, the scale is the largest one."""
    components = list(components)
    if not components:
        raise ValueError("need at least one component")
    return SubGammaParams(math.fsum(c.v2 for c in components), max(c.b for c in components))


def _ratio(num: float, den: float) -> float:
    if den > 0:
        return num / den
    return math.inf if num > 0 else 0.0


def envelope_value(epsilon: float, v2: float, b: float, n: int, env: TailEnvelope) -> float:
    """Tail envelope for explicit ``(v2, b, n)``, clamped to at most 1."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    exponent = min(
        env.c_sq * _ratio(epsilon**2, v2),
        env.c_lin * _ratio(epsilon, b),
        env.c_heavy * n * math.sqrt(epsilon),
    )
    return min(1.0, env.c_out * math.exp(-exponent))


def theorem1_envelope(epsilon: float, pmf: DiscretePmf, n: int, env: TailEnvelope | None = None) -> float:
    """Bound on ``P[|q_hat - Q| > epsilon]`` for a sample of size ``n`` from ``pmf``.

    A point mass has ``q_hat == Q`` surely, so its tail is 0 for every positive epsilon.
    """
    env = env or TailEnvelope()
    _check_n(n)
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    if pmf.max_prob == 1.0:
        return 0.0
    return envelope_value(epsilon, variance_proxy(pmf, n), scale_param(pmf, n), n, env)


def moment_subgamma_check(moments: Mapping[int, float], v: float, b: float, C: float) -> bool:
    """True iff ``(E|Z|^d)^(1/d) <= C (sqrt(d) v + d b)`` for every ``d`` in the table."""
    for d in moments:
        if d % 2:
            raise ValueError(f"moment table must contain even orders only, got d={d}")
    for d, mom in moments.items():
        if d < 2:
            continue
        if mom ** (1.0 / d) > C * (math.sqrt(d) * v + d * b):
            return False
    return True
