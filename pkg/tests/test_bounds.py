import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from collision.bounds import (
    SubGammaParams,
    TailEnvelope,
    aggregate_subgamma,
    envelope_value,
    moment_subgamma_check,
    scale_param,
    subgamma_tail,
    theorem1_envelope,
    variance_proxy,
)
from collision.distribution import collision_probability, make_pmf, uniform, zipf
from collision.moments import MomentTable
from oracles import PMF_GRID, double_factorial, enumerate_estimator

ONES = TailEnvelope(1.0, 1.0, 1.0, 1.0)
params = st.builds(SubGammaParams, st.floats(0, 10), st.floats(0, 10))


class TestProxies:
    def test_variance_proxy_examples(self):
        assert variance_proxy(uniform(10), 100) == pytest.approx(1.1e-4, rel=1e-14)
        assert variance_proxy(make_pmf([1.0]), 10) == pytest.approx(0.11, rel=1e-15)

    def test_variance_proxy_decreasing_in_n(self):
        p = zipf(30, 1.1)
        vals = [variance_proxy(p, n) for n in range(2, 200)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_scale_examples(self):
        assert scale_param(uniform(10), 100) == pytest.approx(1e-3, rel=1e-15)
        assert scale_param(make_pmf([0.7, 0.3]), 7) == pytest.approx(0.1, rel=1e-15)

    @pytest.mark.parametrize("f", [variance_proxy, scale_param])
    def test_rejects_small_n(self, f):
        with pytest.raises(ValueError):
            f(uniform(3), 1)

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=20).filter(lambda w: sum(w) > 1e-3), st.integers(2, 1000))
    def test_scale_below_root_q(self, w, n):
        p = make_pmf(w)
        assert scale_param(p, n) * n <= math.sqrt(collision_probability(p)) * (1 + 1e-12)


class TestVarianceDomination:
    def test_grid(self):
        worst = 0.0
        for probs in PMF_GRID:
            if max(probs) == 1.0:
                continue
            pmf = make_pmf(probs)
            for n in range(2, 7):
                _, var = enumerate_estimator(probs, n)
                worst = max(worst, var / variance_proxy(pmf, n))
        assert worst <= 8.0


class TestSubgammaTail:
    def test_examples(self):
        assert subgamma_tail(0.0, SubGammaParams(1, 1)) == 2.0
        assert subgamma_tail(2.0, SubGammaParams(1, 0)) == pytest.approx(2 * math.exp(-2), rel=1e-15)
        assert subgamma_tail(2.0, SubGammaParams(0, 1)) == pytest.approx(2 * math.exp(-1), rel=1e-15)

    def test_degenerate(self):
        assert subgamma_tail(0.0, SubGammaParams(0, 0)) == 2.0
        with pytest.raises(ValueError):
            subgamma_tail(1.0, SubGammaParams(0, 0))
        with pytest.raises(ValueError):
            subgamma_tail(-1.0, SubGammaParams(1, 1))

    def test_rejects_negative_params(self):
        with pytest.raises(ValueError):
            SubGammaParams(-1, 0)

    def test_monotone_grid(self):
        ts = np.linspace(0.01, 10, 60)
        grid = [0.01, 0.1, 0.5, 1, 3, 10]
        for v2, b in itertools.product(grid, grid):
            tails = [subgamma_tail(t, SubGammaParams(v2, b)) for t in ts]
            assert all(x >= y for x, y in zip(tails, tails[1:]))
            for t in (0.1, 1.0, 5.0):
                here = subgamma_tail(t, SubGammaParams(v2, b))
                assert subgamma_tail(t, SubGammaParams(2 * v2, b)) >= here
                assert subgamma_tail(t, SubGammaParams(v2, 2 * b)) >= here

    @given(st.floats(0, 1e3), params)
    def test_range(self, t, p):
        if t > 0 and p.v2 == p.b == 0:
            return
        assert 0.0 <= subgamma_tail(t, p) <= 2.0


class TestAggregate:
    def test_examples(self):
        assert aggregate_subgamma([SubGammaParams(1, 0.1), SubGammaParams(3, 0.2)]) == SubGammaParams(4, 0.2)
        assert aggregate_subgamma([SubGammaParams(2, 5)]) == SubGammaParams(2, 5)
        assert aggregate_subgamma([SubGammaParams(0, 0)] * 3) == SubGammaParams(0, 0)

    def test_empty(self):
        with pytest.raises(ValueError):
            aggregate_subgamma([])

    @given(st.lists(params, min_size=1, max_size=8), st.randoms())
    def test_order_and_grouping(self, comps, rnd):
        whole = aggregate_subgamma(comps)
        shuffled = list(comps)
        rnd.shuffle(shuffled)
        cut = rnd.randint(1, len(comps))
        parts = [aggregate_subgamma(shuffled[:cut])]
        if shuffled[cut:]:
            parts.append(aggregate_subgamma(shuffled[cut:]))
        nested = aggregate_subgamma(parts)
        assert nested.b == whole.b
        assert nested.v2 == pytest.approx(whole.v2, rel=1e-12, abs=1e-300)


class TestEnvelope:
    def test_example(self):
        assert envelope_value(1.0, 1.0, 1.0, 10, ONES) == pytest.approx(math.exp(-1), rel=1e-15)

    def test_vacuous_near_zero(self):
        assert theorem1_envelope(1e-300, uniform(100), 2000, TailEnvelope()) == 1.0

    def test_non_increasing(self):
        for pmf, n in [(uniform(100), 2000), (zipf(50, 1.3), 300), (make_pmf([0.9, 0.1]), 5)]:
            eps = np.geomspace(1e-6, 2, 300)
            vals = [theorem1_envelope(float(e), pmf, n, TailEnvelope()) for e in eps]
            assert all(a >= b for a, b in zip(vals, vals[1:]))
            assert all(0 <= v <= 1 for v in vals)

    def test_matches_formula(self):
        env = TailEnvelope(1.7, 0.3, 0.2, 0.1)
        pmf, n, eps = zipf(40, 0.9), 150, 0.01
        v2, b = variance_proxy(pmf, n), scale_param(pmf, n)
        expected = min(1.0, 1.7 * math.exp(-min(0.3 * eps**2 / v2, 0.2 * eps / b, 0.1 * n * math.sqrt(eps))))
        assert theorem1_envelope(eps, pmf, n, env) == pytest.approx(expected, rel=1e-14)

    def test_point_mass(self):
        assert theorem1_envelope(0.1, make_pmf([1.0, 0.0]), 10) == 0.0

    def test_rejects(self):
        with pytest.raises(ValueError):
            theorem1_envelope(0.0, uniform(3), 10)
        with pytest.raises(ValueError):
            TailEnvelope(c_sq=0.0)
        with pytest.raises(ValueError):
            TailEnvelope(c_out=math.inf)

    def test_dict_round_trip(self):
        env = TailEnvelope(1.5, 0.2, 0.3, 0.4)
        assert TailEnvelope.from_dict(env.to_dict()) == env


class TestMomentSubgamma:
    def test_normal_moments(self):
        table = MomentTable({d: float(double_factorial(d - 1)) for d in range(2, 13, 2)})
        assert moment_subgamma_check(table, 1.0, 0.0, 2.0)

    def test_huge_moment(self):
        assert not moment_subgamma_check({4: 1e30}, 1e-9, 1e-9, 1.0)

    def test_empty(self):
        assert moment_subgamma_check({}, 0.0, 0.0, 1.0)
        assert moment_subgamma_check(MomentTable({}), 0.0, 0.0, 1.0)

    def test_odd_rejected(self):
        with pytest.raises(ValueError):
            moment_subgamma_check({3: 1.0}, 1.0, 0.0, 2.0)
