"""Finite discrete distributions: construction, power sums and alias sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping, Sequence

import numpy as np

from .estimator import SampleHistogram

__all__ = [
    "AliasTable",
    "DiscretePmf",
    "SampleSeed",
    "collision_probability",
    "make_pmf",
    "planted_bias",
    "pmf_from_spec",
    "power_sum",
    "sample_histogram",
    "sample_indices",
    "uniform",
    "zipf",
]

_NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscretePmf:
    """Probability mass function over the alphabet ``0..m-1``.

    ``probs`` is stored as a read-only float64 array. Instances are immutable
    and may be shared between threads.
    """

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64).ravel()
        if p.size < 1:
            raise ValueError("pmf needs at least one symbol")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValueError("pmf entries must be finite and non-negative")
        total = math.fsum(p)
        if abs(total - 1.0) > _NORM_TOL:
            raise ValueError(f"pmf entries sum to {total!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def m(self) -> int:
        return int(self.probs.size)

    @property
    def max_prob(self) -> float:
        return float(self.probs.max())

    @cached_property
    def alias(self) -> "AliasTable":
        return AliasTable.build(self.probs)

    def __len__(self):
        return self.m

    def __repr__(self):
        if self.m <= 8:
            return f"DiscretePmf({np.round(self.probs, 6).tolist()})"
        return f"DiscretePmf(m={self.m}, max_prob={self.max_prob:.3g})"


@dataclass(frozen=True)
class SampleSeed:
    """Identifies one reproducible random stream: ``(master_seed, stream_id)``."""

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        # Philox is counter based; spawn_key keeps distinct streams independent.
        ss = np.random.SeedSequence(
            entropy=self.master_seed & 0xFFFFFFFFFFFFFFFF,
            spawn_key=(self.stream_id & 0xFFFFFFFFFFFFFFFF,),
        )
        return np.random.Generator(np.random.Philox(ss))


def make_pmf(weights: Sequence[float]) -> DiscretePmf:
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.size == 0:
        raise ValueError("weights must be non-empty")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    total = math.fsum(w)
    if total <= 0:
        raise ValueError("at least one weight must be strictly positive")
    p = w / total
    # absorb the last ulp of rounding so the sum check is exact
    resid = 1.0 - math.fsum(p)
    if resid != 0.0:
        p[int(np.argmax(p))] += resid
    return DiscretePmf(p)


def uniform(m: int) -> DiscretePmf:
    if int(m) != m or m < 1:
        raise ValueError(f"alphabet size must be a positive integer, got {m!r}")
    return DiscretePmf(np.full(int(m), 1.0 / m))


def planted_bias(m: int, alpha: float) -> DiscretePmf:
    """Half the symbols get ``(1+sqrt(alpha))/m``, the other half ``(1-sqrt(alpha))/m``.

    The result has collision probability exactly ``(1+alpha)/m`` and squared
    L2 distance ``alpha/m`` from the uniform distribution.
    """
    if int(m) != m or m < 2 or m % 2:
        raise ValueError(f"planted_bias needs an even alphabet size, got {m!r}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    m = int(m)
    beta = math.sqrt(alpha)
    half = m // 2
    p = np.empty(m)
    p[:half] = (1.0 + beta) / m
    p[half:] = (1.0 - beta) / m
    return DiscretePmf(p)


def zipf(m: int, s: float) -> DiscretePmf:
    if int(m) != m or m < 1:
        raise ValueError(f"alphabet size must be a positive integer, got {m!r}")
    if not s >= 0:
        raise ValueError(f"zipf exponent must be >= 0, got {s!r}")
    k = np.arange(1, int(m) + 1, dtype=np.float64)
    return make_pmf(k ** (-float(s)))


def power_sum(pmf: DiscretePmf, k: int) -> float:
    """``sum_x p_x**k`` with compensated summation."""
    if int(k) != k or k < 1:
        raise ValueError(f"power must be an integer >= 1, got {k!r}")
    return math.fsum(pmf.probs ** int(k))


def collision_probability(pmf: DiscretePmf) -> float:
    return power_sum(pmf, 2)


def pmf_from_spec(spec: Mapping[str, Any]) -> DiscretePmf:
    """Build a pmf from a config mapping such as ``{"family": "zipf", "m": 1000, "s": 1.5}``."""
    family = spec.get("family")
    if family == "uniform":
        return uniform(int(spec["m"]))
    if family == "zipf":
        return zipf(int(spec["m"]), float(spec.get("s", 1.0)))
    if family == "planted_bias":
        return planted_bias(int(spec["m"]), float(spec["alpha"]))
    if family == "explicit":
        return make_pmf(spec["weights"])
    raise ValueError(f"unknown distribution family {family!r}")


@dataclass(frozen=True, eq=False)
class AliasTable:
    """Vose alias table: O(m) construction, O(1) per draw."""

    prob: np.ndarray = field(repr=False)
    alias: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, probs: np.ndarray) -> "AliasTable":
        m = len(probs)
        scaled = np.asarray(probs, dtype=np.float64) * m
        prob = np.ones(m)
        alias = np.arange(m, dtype=np.int64)
        small = [i for i in range(m) if scaled[i] < 1.0]
        large = [i for i in range(m) if scaled[i] >= 1.0]
        s = scaled.tolist()
        while small and large:
            lo = small.pop()
            hi = large.pop()
            prob[lo] = s[lo]
            alias[lo] = hi
            s[hi] = (s[hi] + s[lo]) - 1.0
            if s[hi] < 1.0:
                small.append(hi)
            else:
                large.append(hi)
        # leftovers are 1 up to rounding
        for i in small + large:
            prob[i] = 1.0
        prob.setflags(write=False)
        alias.setflags(write=False)
        return cls(prob, alias)

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        m = self.prob.size
        column = rng.integers(0, m, size=n)
        coin = rng.random(n)
        return np.where(coin < self.prob[column], column, self.alias[column])


def sample_indices(pmf: DiscretePmf, n: int, seed: SampleSeed) -> np.ndarray:
    """Draw ``n`` iid symbol indices; deterministic given ``seed``."""
    return pmf.alias.draw(seed.generator(), int(n))


def sample_histogram(pmf: DiscretePmf, n: int, seed: SampleSeed) -> SampleHistogram:
    if int(n) != n or n < 2:
        raise ValueError(f"sample size must be an integer >= 2, got {n!r}")
    draws = sample_indices(pmf, n, seed)
    return SampleHistogram(np.bincount(draws, minlength=pmf.m))
