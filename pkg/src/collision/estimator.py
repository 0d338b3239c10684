"""The collision estimator, its per-bin decomposition, the uniformity tester
and collision-entropy estimates."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

__all__ = [
    "BinContribution",
    "CollisionEstimate",
    "Decision",
    "EntropyUndefinedError",
    "SampleHistogram",
    "bin_contributions",
    "centered_decomposition",
    "entropy_estimate",
    "entropy_sample_size",
    "estimate_from_histogram",
    "estimate_pairwise",
    "histogram_of",
    "tester_sample_size",
    "uniformity_test",
]

# Beyond this n, sum_x S_x(S_x-1) <= n(n-1) may leave int64.
_INT64_SAFE_N = 3_000_000_000


class EntropyUndefinedError(ValueError):
    """Raised when the sample has no collisions, so ``-log(q_hat)`` is infinite."""


class Decision(str, enum.Enum):
    UNIFORM = "uniform"
    NON_UNIFORM = "non_uniform"


@dataclass(frozen=True, eq=False)
class SampleHistogram:
    """Bin loads ``S_x`` of an iid sample; ``n = sum(counts)``."""

    counts: np.ndarray
    symbols: tuple | None = None

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 1:
            raise ValueError("counts must be one-dimensional")
        if c.size and not np.issubdtype(c.dtype, np.integer):
            if not np.all(np.equal(np.mod(c, 1), 0)):
                raise ValueError("counts must be integers")
        c = c.astype(np.int64)
        if np.any(c < 0):
            raise ValueError("counts must be non-negative")
        if self.symbols is not None and len(self.symbols) != c.size:
            raise ValueError("symbols and counts differ in length")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def m(self) -> int:
        return int(self.counts.size)


@dataclass(frozen=True)
class CollisionEstimate:
    collision_pairs: int
    n: int

    @property
    def q_hat(self) -> float:
        return self.collision_pairs / (self.n * (self.n - 1))


@dataclass(frozen=True)
class BinContribution:
    x: int
    value: int


def histogram_of(sample: Iterable[Hashable]) -> SampleHistogram:
    """Histogram of a symbol sequence; symbols are interned by first appearance."""
    index: dict = {}
    counts: list[int] = []
    for s in sample:
        i = index.setdefault(s, len(index))
        if i == len(counts):
            counts.append(0)
        counts[i] += 1
    return SampleHistogram(np.array(counts, dtype=np.int64), tuple(index))


def _check_n(n: int) -> None:
    if n < 2:
        raise ValueError(f"collision estimator needs n >= 2 samples, got {n}")


def estimate_pairwise(sample: Sequence[Hashable]) -> CollisionEstimate:
    """Reference O(n^2) estimator: counts ordered pairs ``i != j`` with equal symbols."""
    n = len(sample)
    _check_n(n)
    codes: dict = {}
    x = np.fromiter((codes.setdefault(s, len(codes)) for s in sample), dtype=np.int64, count=n)
    equal = x[:, None] == x[None, :]
    pairs = int(equal.sum()) - n  # drop the diagonal
    return CollisionEstimate(pairs, n)


def _pair_count(counts: np.ndarray, n: int) -> int:
    if n < _INT64_SAFE_N:
        return int(np.sum(counts * (counts - 1)))
    return sum(int(s) * (int(s) - 1) for s in counts)


def estimate_from_histogram(hist: SampleHistogram) -> CollisionEstimate:
    n = hist.n
    _check_n(n)
    return CollisionEstimate(_pair_count(hist.counts, n), n)


def bin_contributions(hist: SampleHistogram) -> list[BinContribution]:
    """Ordered colliding pairs ``S_x(S_x-1)`` for every symbol that occurs."""
    nz = np.flatnonzero(hist.counts)
    return [BinContribution(int(x), int(hist.counts[x]) * (int(hist.counts[x]) - 1)) for x in nz]


def centered_decomposition(S: int, n: int, p: float) -> tuple[float, float, float]:
    """Split the centered bin contribution into its linear and quadratic parts.

    Returns ``(lhs, u1, u2)`` where ``lhs = S^2 - S - n(n-1)p^2``,
    ``u1 = sum_i xi_i`` and ``u2 = sum_{i!=j} xi_i xi_j`` for the centered
    indicators ``xi_i = 1(X_i = x) - p``. They satisfy
    ``lhs == u2 + 2(n-1)p*u1``.
    """
    if not 0 <= S <= n:
        raise ValueError(f"bin load S={S} must lie in [0, n={n}]")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    lhs = S * S - S - n * (n - 1) * p * p
    u1 = S - n * p
    sum_xi_sq = S * (1 - p) ** 2 + (n - S) * p * p
    u2 = u1 * u1 - sum_xi_sq
    return lhs, u1, u2


def uniformity_test(hist: SampleHistogram, m: int, epsilon: float) -> Decision:
    """Collision-based uniformity test over an alphabet of size ``m``.

    Rejects uniformity iff ``q_hat > (1+epsilon)/m``; a tie accepts.
    """
    if m < 1:
        raise ValueError(f"alphabet size must be >= 1, got {m}")
    if not (1.0 / math.sqrt(m) <= epsilon <= 1.0):
        warnings.warn(
            f"epsilon={epsilon} outside the guaranteed range [1/sqrt(m), 1] = [{1 / math.sqrt(m):.4g}, 1]",
            stacklevel=2,
        )
    est = estimate_from_histogram(hist)
    threshold = (1.0 + epsilon) / m
    if est.q_hat > threshold:
        return Decision.NON_UNIFORM
    return Decision.UNIFORM


def entropy_estimate(hist: SampleHistogram, base: float = 2.0) -> float:
    """Collision (Renyi-2) entropy estimate ``-log_base(q_hat)``."""
    if not base > 1:
        raise ValueError(f"logarithm base must exceed 1, got {base!r}")
    est = estimate_from_histogram(hist)
    if est.collision_pairs == 0:
        raise EntropyUndefinedError("no collisions in the sample: estimate undefined; increase n")
    return -math.log(est.q_hat) / math.log(base)


def _log_inv_delta(delta: float) -> float:
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    return max(1.0, math.log(1.0 / delta))


def tester_sample_size(m: int, epsilon: float, delta: float, C: float) -> int:
    """``ceil(C * max(1, ln(1/delta)) * sqrt(m) / epsilon)``, at least 2."""
    if m < 1:
        raise ValueError(f"alphabet size must be >= 1, got {m}")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon!r}")
    if not C > 0:
        raise ValueError(f"C must be positive, got {C!r}")
    n = math.ceil(C * _log_inv_delta(delta) * math.sqrt(m) / epsilon)
    return max(2, n)


def entropy_sample_size(q_lower: float, epsilon: float, delta: float, C: float) -> int:
    """``ceil(C * max(1, ln(1/delta)) / (sqrt(q_lower) * epsilon^2))``, at least 2."""
    if not 0.0 < q_lower <= 1.0:
        raise ValueError(f"q_lower must lie in (0, 1], got {q_lower!r}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if not C > 0:
        raise ValueError(f"C must be positive, got {C!r}")
    n = math.ceil(C * _log_inv_delta(delta) / (math.sqrt(q_lower) * epsilon**2))
    return max(2, n)
