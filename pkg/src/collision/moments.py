"""Exact moment oracles and moment bounds for bin contributions.

Exact quantities (binomial pmfs, symmetrized binomial moments, Rademacher
moments, enumerations over centered Bernoulli vectors) are computed on
ranges where they are cheap and stable. Bounds are evaluated in log space
because terms like ``(np)^(d+1)`` and ``d^d`` overflow quickly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import numpy as np

__all__ = [
    "AuxFunctionParams",
    "MomentTable",
    "aux_g",
    "aux_g_argmax",
    "aux_g_sup_bound",
    "bin_moment_bound",
    "bin_moment_exact",
    "bin_moment_table",
    "bernoulli_sum_moment_exact",
    "binomial_pmf",
    "centered_bernoulli_moment",
    "decoupling_check",
    "decoupling_moments",
    "default_bin_moment_grid",
    "even_multinomial_sum",
    "fit_bin_moment_constants",
    "lambert_w",
    "latala_T",
    "moment_table_rows",
    "rademacher_moment_exact",
    "symm_diff_moment_bound",
    "symm_diff_moment_exact",
    "symmetrization_check",
    "symmetrization_moments",
]

_INV_E = math.exp(-1.0)


def _check_even(d: int) -> None:
    if int(d) != d or d < 2 or d % 2:
        raise ValueError(f"moment order must be an even integer >= 2, got {d!r}")


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")


@dataclass(frozen=True)
class MomentTable:
    """Even-order moments ``{d: E|Z|^d}`` of one random variable."""

    entries: Mapping[int, float]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for d, v in self.entries.items():
            if int(d) != d or d < 2 or d % 2:
                raise ValueError(f"moment table keys must be even integers >= 2, got {d!r}")
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"moment E|Z|^{d} must be finite and non-negative, got {v!r}")
        object.__setattr__(self, "entries", dict(sorted(self.entries.items())))

    def __getitem__(self, d: int) -> float:
        return self.entries[d]

    def __iter__(self):
        return iter(self.entries)

    def items(self):
        return self.entries.items()


# -- binomial oracles ---------------------------------------------------------


def binomial_pmf(n: int, p: float) -> np.ndarray:
    """Exact Binomial(n, p) pmf on ``0..n``.

    Built by the ratio recurrence outward from the mode in extended precision,
    then normalized.
    """
    _check_p(p)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    out = np.zeros(n + 1, dtype=np.longdouble)
    if p == 0.0:
        out[0] = 1
        return out
    if p == 1.0:
        out[n] = 1
        return out
    pl = np.longdouble(p)
    odds = pl / (1 - pl)
    mode = min(n, int(math.floor((n + 1) * p)))
    out[mode] = 1
    for k in range(mode, n):
        out[k + 1] = out[k] * (n - k) / (k + 1) * odds
    for k in range(mode, 0, -1):
        out[k - 1] = out[k] * k / (n - k + 1) / odds
    return out / out.sum()


def symm_diff_moment_exact(n: int, p: float, d: int) -> float:
    """``E(S - S')^d`` for independent ``S, S' ~ Binomial(n, p)``."""
    _check_even(d)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    f = binomial_pmf(n, p)
    diff = np.convolve(f, f[::-1])  # support -n..n
    k = np.arange(-n, n + 1, dtype=np.longdouble)
    return float(np.sum(diff * k**d))


def _logsumexp(xs: Iterable[float]) -> float:
    xs = [x for x in xs if x != -math.inf]
    if not xs:
        return -math.inf
    top = max(xs)
    return top + math.log(math.fsum(math.exp(x - top) for x in xs))


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def symm_diff_moment_bound(n: int, p: float, d: int, C: float = 1.0) -> float:
    """``(C d)^(d/2) sum_{l=1}^{d/2} binom(n, l) l^(d/2) sigma^(2l)`` with ``sigma^2 = 2p(1-p)``."""
    _check_even(d)
    _check_p(p)
    sigma2 = 2.0 * p * (1.0 - p)
    if sigma2 == 0.0 or n < 1:
        return 0.0
    half = d // 2
    terms = (
        _log_binom(n, l) + half * math.log(l) + l * math.log(sigma2)
        for l in range(1, min(half, n) + 1)
    )
    return math.exp(half * math.log(C * d) + _logsumexp(terms))


def bin_moment_exact(n: int, p: float, d: int) -> float:
    """``E|S^2 - S - n(n-1)p^2|^d`` for ``S ~ Binomial(n, p)``."""
    _check_even(d)
    f = binomial_pmf(n, p)
    s = np.arange(n + 1, dtype=np.longdouble)
    centered = s * s - s - np.longdouble(n * (n - 1)) * np.longdouble(p) ** 2
    return float(np.sum(f * np.abs(centered) ** d))


def bin_moment_bound(n: int, p: float, d: int, C1: float, C2: float) -> float:
    """Two-term moment bound for one bin contribution ``S^2 - S``.

    ``(C1 d)^d (np)^2 max(d,np)^(d-2) + (C2 d)^(d/2) (np)^(d+1) max(d,np)^(d/2-1)``
    """
    _check_even(d)
    _check_p(p)
    lam = n * p
    if lam == 0.0:
        return 0.0
    top = math.log(max(d, lam))
    first = d * math.log(C1 * d) + 2 * math.log(lam) + (d - 2) * top
    second = (d // 2) * math.log(C2 * d) + (d + 1) * math.log(lam) + (d // 2 - 1) * top
    return math.exp(_logsumexp([first, second]))


def bin_moment_table(n: int, p: float, ds: Iterable[int]) -> MomentTable:
    return MomentTable({d: bin_moment_exact(n, p, d) for d in ds}, {"kind": "bin", "n": n, "p": p})


def default_bin_moment_grid():
    """(n, p, d) cells covering n <= 100, np in [0.01, 50], even d <= 12."""
    ns = [2, 3, 4, 5, 7, 10, 15, 20, 30, 50, 70, 100]
    lams = np.geomspace(0.01, 50.0, 31)
    for n in ns:
        for lam in lams:
            if lam <= n:
                for d in range(2, 13, 2):
                    yield n, float(lam) / n, d


def fit_bin_moment_constants(grid=None, resolution: float = 1.1) -> tuple[float, float]:
    """Smallest common ``C1 = C2`` on a geometric grid (step ``resolution``) for
    which :func:`bin_moment_bound` dominates :func:`bin_moment_exact` on every cell."""
    cells = list(grid if grid is not None else default_bin_moment_grid())
    exact = [bin_moment_exact(n, p, d) for n, p, d in cells]
    k = -40
    while True:
        c = resolution**k
        if all(bin_moment_bound(n, p, d, c, c) >= e for (n, p, d), e in zip(cells, exact)):
            return c, c
        k += 1
        if k > 200:
            raise RuntimeError("no feasible bin-moment constant below 1.1**200")


def moment_table_rows(ns, ps, ds, C1: float, C2: float, kind: str = "bin", C: float = 1.0):
    """Rows ``(n, p, d, exact, bound, ratio)`` comparing exact moments with their bounds."""
    rows = []
    for n in ns:
        for p in ps:
            for d in ds:
                if kind == "bin":
                    exact = bin_moment_exact(n, p, d)
                    bound = bin_moment_bound(n, p, d, C1, C2)
                elif kind == "symm":
                    exact = symm_diff_moment_exact(n, p, d)
                    bound = symm_diff_moment_bound(n, p, d, C)
                else:
                    raise ValueError(f"unknown moment table kind {kind!r}")
                ratio = exact / bound if bound > 0 else (0.0 if exact == 0 else math.inf)
                rows.append((n, p, d, exact, bound, ratio))
    return rows


# -- combinatorics ------------------------------------------------------------


def rademacher_moment_exact(l: int, d: int) -> int:
    """``E(r_1 + ... + r_l)^d`` for iid signs, as an exact integer."""
    _check_even(d)
    if int(l) != l or not 1 <= l <= 64 or d > 32:
        raise ValueError(f"exact Rademacher moments need 1 <= l <= 64 and d <= 32, got l={l}, d={d}")
    # counts[s + l] = number of sign vectors of the partial sum with value s
    counts = {0: 1}
    for _ in range(l):
        nxt: dict[int, int] = {}
        for s, c in counts.items():
            nxt[s + 1] = nxt.get(s + 1, 0) + c
            nxt[s - 1] = nxt.get(s - 1, 0) + c
        counts = nxt
    total = sum(c * s**d for s, c in counts.items())
    q, r = divmod(total, 2**l)
    assert r == 0
    return q


def even_multinomial_sum(l: int, d: int) -> int:
    """Sum of ``d! / (c_1! ... c_l!)`` over compositions of ``d`` into ``l`` even parts >= 2."""
    _check_even(d)
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    if l > d // 2:
        return 0
    # ways[t] = sum over compositions of t into j even parts of 1/prod(c_i!)
    ways = {0: Fraction(1)}
    for _ in range(l):
        nxt: dict[int, Fraction] = {}
        for t, w in ways.items():
            for c in range(2, d - t + 1, 2):
                nxt[t + c] = nxt.get(t + c, Fraction(0)) + w / math.factorial(c)
        ways = nxt
    value = ways.get(d, Fraction(0)) * math.factorial(d)
    assert value.denominator == 1
    return int(value)


# -- Lambert W and the auxiliary function -------------------------------------


def lambert_w(x: float) -> float:
    """Principal branch of the Lambert W function for real ``x >= -1/e``.

    Halley iteration from a branch-point series (near -1/e), ``log1p`` (small
    x) or the asymptotic ``log x - log log x`` (large x).
    """
    x = float(x)
    if math.isnan(x) or x < -_INV_E:
        raise ValueError(f"Lambert W principal branch is real only for x >= -1/e, got {x!r}")
    if x == 0.0:
        return 0.0
    if x == -_INV_E:
        return -1.0
    if math.isinf(x):
        return math.inf
    if x < -0.3:
        q = math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0)))
        w = -1.0 + q - q * q / 3.0 + 11.0 / 72.0 * q**3
    elif x < 3.0:
        w = math.log1p(x)
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    for _ in range(64):
        ew = math.exp(w)
        f = w * ew - x
        w1 = w + 1.0
        if w1 == 0.0:
            break
        dw = f / (ew * w1 - (w + 2.0) * f / (2.0 * w1))
        w -= dw
        if abs(dw) <= 1e-14 * abs(w):
            break
    return w


@dataclass(frozen=True)
class AuxFunctionParams:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"a and b must be positive, got a={self.a}, b={self.b}")


def aux_g(l, params: AuxFunctionParams):
    """``a^l * l^(b-l)``, evaluated as ``exp(l ln a + (b-l) ln l)``; accepts arrays."""
    l = np.asarray(l, dtype=np.float64)
    if np.any(l <= 0):
        raise ValueError("l must be positive")
    out = np.exp(l * math.log(params.a) + (params.b - l) * np.log(l))
    return float(out) if out.ndim == 0 else out


def aux_g_argmax(params: AuxFunctionParams) -> float:
    """Location ``b / W(b e / a)`` of the unique maximum of :func:`aux_g` on ``(0, inf)``."""
    return params.b / lambert_w(params.b * math.e / params.a)


def aux_g_sup_bound(params: AuxFunctionParams) -> float:
    """Upper bound ``a * max(a, b)^(b-1)`` on ``aux_g`` over ``[1, b]``."""
    if params.b < 1:
        raise ValueError(f"supremum bound needs b >= 1, got {params.b}")
    return math.exp(math.log(params.a) + (params.b - 1) * math.log(max(params.a, params.b)))


# -- simplified Latala bound --------------------------------------------------


def latala_T(
    moment_provider: Callable[[int], float],
    d: int,
    bracket: tuple[float, float] = (np.finfo(float).eps, 1.0),
    rtol: float = 1e-9,
) -> float:
    """Smallest ``T`` with ``sum_x E phi(W_x / T) <= d``.

    ``phi(u) = ((1+u)^d + (1-u)^d)/2 - 1`` expands to
    ``sum_{k even >= 2} binom(d, k) u^k``, so the condition only needs the
    summed even moments ``moment_provider(k) = sum_x E W_x^k``.
    """
    _check_even(d)
    coeffs = [(k, math.comb(d, k) * float(moment_provider(k))) for k in range(2, d + 1, 2)]
    if any(c < 0 or not math.isfinite(c) for _, c in coeffs):
        raise ValueError("even moments must be finite and non-negative")
    if all(c == 0 for _, c in coeffs):
        return 0.0

    def excess(log_t: float) -> float:
        # log of sum_k c_k T^-k minus log d; decreasing in T
        return _logsumexp([math.log(c) - k * log_t for k, c in coeffs if c > 0]) - math.log(d)

    lo, hi = math.log(bracket[0]), math.log(bracket[1])
    if not lo < hi:
        raise ValueError(f"invalid bracket {bracket!r}")
    for _ in range(60):
        if excess(lo) > 0:
            break
        lo -= math.log(2.0)
    else:
        raise ValueError("could not find a lower bracket for T")
    for _ in range(60):
        if excess(hi) <= 0:
            break
        hi += math.log(2.0)
    else:
        raise ValueError("could not find an upper bracket for T")
    while hi - lo > math.log1p(rtol) / 4:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return math.exp(hi)


def bernoulli_sum_moment_exact(ps, d: int) -> float:
    """``E|sum_x (B_x - p_x)|^d`` for independent ``B_x ~ Bernoulli(p_x)``."""
    _check_even(d)
    ps = [float(p) for p in ps]
    for p in ps:
        _check_p(p)
    f = np.array([1.0], dtype=np.longdouble)
    for p in ps:
        f = np.convolve(f, np.array([1 - p, p], dtype=np.longdouble))
    s = np.arange(len(ps) + 1, dtype=np.longdouble) - np.longdouble(math.fsum(ps))
    return float(np.sum(f * np.abs(s) ** d))


def centered_bernoulli_moment(p: float, k: int) -> float:
    """``E(B - p)^k`` for ``B ~ Bernoulli(p)``."""
    return p * (1 - p) ** k + (1 - p) * (-p) ** k


# -- decoupling and symmetrization by enumeration -----------------------------

_MAX_ENUM_N = 8


def _centered_bernoulli_outcomes(n: int, p: float):
    """All 2^n outcomes of ``xi = Bern(p) - p`` vectors with their probabilities."""
    bits = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.float64)
    probs = np.prod(np.where(bits == 1, p, 1 - p), axis=1)
    return bits - p, probs


def _check_enum(n: int, p: float, d: int) -> None:
    _check_even(d)
    _check_p(p)
    if not 1 <= n <= _MAX_ENUM_N:
        raise ValueError(f"exact enumeration supports 1 <= n <= {_MAX_ENUM_N}, got {n}")


def decoupling_moments(n: int, p: float, d: int) -> tuple[float, float]:
    """``(E|sum_{i!=j} xi_i xi_j|^d, E|sum_{i!=j} xi_i xi'_j|^d)`` by exact enumeration."""
    _check_enum(n, p, d)
    xi, w = _centered_bernoulli_outcomes(n, p)
    tot = xi.sum(axis=1)
    coupled = tot**2 - (xi**2).sum(axis=1)
    lhs = math.fsum(w * np.abs(coupled) ** d)
    # sum_{i!=j} xi_i xi'_j = (sum xi)(sum xi') - sum_i xi_i xi'_i
    bilinear = np.outer(tot, tot) - xi @ xi.T
    rhs = math.fsum((np.outer(w, w) * np.abs(bilinear) ** d).ravel())
    return lhs, rhs


def decoupling_check(n: int, p: float, d: int) -> bool:
    """Decoupling with ``f = |.|^d``: ``E f(coupled) <= E f(4 * bilinear)``.

    The constant 4 acts on the argument of the convex function, so the moment
    comparison carries ``4^d``. With the 4 outside ``f`` the inequality already
    fails at ``n=3, p=0.1, d=4`` (ratio about 12.9).
    """
    lhs, rhs = decoupling_moments(n, p, d)
    return lhs <= 4.0**d * rhs * (1 + 1e-12)


def symmetrization_moments(n: int, p: float, d: int) -> tuple[float, float]:
    """``(E|sum xi_i|^d, E|sum eta_i|^d)`` with ``eta`` a difference of two iid Bernoullis."""
    _check_enum(n, p, d)
    xi, w = _centered_bernoulli_outcomes(n, p)
    lhs = math.fsum(w * np.abs(xi.sum(axis=1)) ** d)
    q = p * (1 - p)
    vals = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=n)))
    probs = np.prod(np.where(vals == 0, 1 - 2 * q, q), axis=1)
    rhs = math.fsum(probs * np.abs(vals.sum(axis=1)) ** d)
    return lhs, rhs


def symmetrization_check(n: int, p: float, d: int) -> bool:
    lhs, rhs = symmetrization_moments(n, p, d)
    return lhs <= rhs * (1 + 1e-12)
