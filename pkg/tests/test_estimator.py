import math
import random
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from collision.estimator import (
    Decision,
    EntropyUndefinedError,
    SampleHistogram,
    bin_contributions,
    centered_decomposition,
    entropy_estimate,
    entropy_sample_size,
    estimate_from_histogram,
    estimate_pairwise,
    histogram_of,
    tester_sample_size,
    uniformity_test,
)
from oracles import PMF_GRID, enumerate_estimator, pair_collisions

samples = st.lists(st.integers(0, 6), min_size=2, max_size=60)


def hist(counts):
    return SampleHistogram(np.array(counts))


class TestPairwise:
    @pytest.mark.parametrize(
        "sample, q",
        [("aab", 1 / 3), ("abcd", 0.0), ("aaa", 1.0)],
    )
    def test_examples(self, sample, q):
        assert estimate_pairwise(list(sample)).q_hat == q

    def test_too_small(self):
        with pytest.raises(ValueError):
            estimate_pairwise(["a"])


class TestHistogram:
    def test_examples(self):
        assert estimate_from_histogram(hist([2, 1])).q_hat == 1 / 3
        assert estimate_from_histogram(hist([5])).q_hat == 1.0
        assert estimate_from_histogram(hist([1] * 100)).q_hat == 0.0

    def test_too_small(self):
        with pytest.raises(ValueError):
            estimate_from_histogram(hist([1, 0]))

    def test_rejects_bad_counts(self):
        with pytest.raises(ValueError):
            hist([2, -1])
        with pytest.raises(ValueError):
            SampleHistogram(np.array([1.5, 2]))

    def test_interning_by_first_appearance(self):
        h = histogram_of(["z", "a", "z", "q"])
        assert h.symbols == ("z", "a", "q")
        np.testing.assert_array_equal(h.counts, [2, 1, 1])

    def test_big_counts_exact(self):
        # S(S-1) summed must stay exact beyond 2**53
        c = 10**8
        est = estimate_from_histogram(hist([c, c]))
        assert est.collision_pairs == 2 * c * (c - 1)

    @given(samples)
    def test_equivalence(self, s):
        a = estimate_pairwise(s)
        b = estimate_from_histogram(histogram_of(s))
        assert a.collision_pairs == b.collision_pairs == pair_collisions(s)

    @given(samples)
    def test_range(self, s):
        est = estimate_from_histogram(histogram_of(s))
        assert 0.0 <= est.q_hat <= 1.0
        assert (est.q_hat == 1.0) == (len(set(s)) == 1)
        assert (est.q_hat == 0.0) == (len(set(s)) == len(s))


class TestBinContributions:
    def test_examples(self):
        assert bin_contributions(hist([2, 1])) == [
            type(bin_contributions(hist([2]))[0])(0, 2),
            type(bin_contributions(hist([2]))[0])(1, 0),
        ]
        assert [b.value for b in bin_contributions(hist([3]))] == [6]
        assert all(b.value == 0 for b in bin_contributions(hist([1] * 7)))

    def test_skips_empty_bins(self):
        assert [b.x for b in bin_contributions(hist([0, 3, 0, 1]))] == [1, 3]

    @given(samples)
    def test_sum_to_pairs(self, s):
        h = histogram_of(s)
        assert sum(b.value for b in bin_contributions(h)) == estimate_from_histogram(h).collision_pairs


class TestDecomposition:
    def test_example(self):
        lhs, u1, u2 = centered_decomposition(2, 3, 0.5)
        assert (lhs, u1, u2) == pytest.approx((0.5, 0.5, -0.5), abs=1e-15)
        assert lhs == pytest.approx(u2 + 2 * 2 * 0.5 * u1, abs=1e-15)

    def test_centered(self):
        lhs, u1, u2 = centered_decomposition(1, 2, 0.5)
        assert u1 == 0 and lhs == u2

    def test_zero(self):
        assert centered_decomposition(0, 5, 0.0) == (0, 0, 0)

    def test_rejects(self):
        with pytest.raises(ValueError):
            centered_decomposition(4, 3, 0.5)

    def test_identity_grid(self):
        for n in range(1, 21):
            for S in range(n + 1):
                for p in np.round(np.arange(0, 1.01, 0.1), 10):
                    lhs, u1, u2 = centered_decomposition(S, n, float(p))
                    assert lhs == pytest.approx(u2 + 2 * (n - 1) * p * u1, abs=1e-12 * max(1, n * n))

    def test_matches_indicator_sums(self):
        # u1, u2 from explicit xi vectors
        rng = random.Random(3)
        for _ in range(50):
            n = rng.randint(1, 12)
            p = rng.random()
            z = [rng.random() < 0.4 for _ in range(n)]
            xi = [zi - p for zi in z]
            u1 = sum(xi)
            u2 = sum(xi[i] * xi[j] for i in range(n) for j in range(n) if i != j)
            _, a1, a2 = centered_decomposition(sum(z), n, p)
            assert a1 == pytest.approx(u1, abs=1e-12)
            assert a2 == pytest.approx(u2, abs=1e-12)


class TestUnbiased:
    @pytest.mark.parametrize("probs", PMF_GRID[:8])
    def test_small_enumeration(self, probs):
        q = math.fsum(p * p for p in probs)
        for n in (2, 3, 4):
            mean, _ = enumerate_estimator(probs, n)
            assert abs(mean - q) <= 1e-12


class TestUniformityTest:
    def test_threshold(self):
        # m=4, eps=0.2 puts the threshold at 0.3
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            above = hist([3, 2, 2, 1])  # 10 / 56
            assert uniformity_test(hist([4, 1, 1]), 4, 0.2) is Decision.NON_UNIFORM  # 12 / 30
            assert uniformity_test(hist([2, 2, 1]), 4, 0.2) is Decision.UNIFORM  # 4 / 20
            assert uniformity_test(above, 4, 0.2) is Decision.UNIFORM

    def test_tie_goes_to_uniform(self):
        h = hist([3, 1, 1])  # 6 / 20
        assert estimate_from_histogram(h).q_hat == 0.3
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert uniformity_test(h, 4, 0.2) is Decision.UNIFORM

    def test_warns_outside_range(self):
        with pytest.warns(UserWarning):
            uniformity_test(hist([2, 1]), 100, 0.05)

    def test_no_warning_inside_range(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            uniformity_test(hist([2, 1]), 4, 0.5)

    def test_rejects_m_zero(self):
        with pytest.raises(ValueError):
            uniformity_test(hist([2, 1]), 0, 0.5)

    @given(samples, st.randoms())
    def test_order_invariant(self, s, rnd):
        shuffled = list(s)
        rnd.shuffle(shuffled)
        a = uniformity_test(histogram_of(s), 7, 0.5)
        b = uniformity_test(histogram_of(shuffled), 7, 0.5)
        assert a is b


class TestEntropy:
    def test_examples(self):
        assert entropy_estimate(hist([4])) == 0.0
        assert entropy_estimate(hist([4, 2, 1, 1])) == 2.0  # 14 / 56
        assert entropy_estimate(hist([2, 1])) == pytest.approx(math.log2(3))
        assert entropy_estimate(hist([3, 2, 1, 1, 1])) == pytest.approx(math.log2(7))

    def test_base(self):
        h = hist([2, 2, 2, 1, 1, 1])
        q = estimate_from_histogram(h).q_hat
        assert entropy_estimate(h, base=math.e) == pytest.approx(-math.log(q))
        assert entropy_estimate(h, base=10) == pytest.approx(-math.log10(q))

    def test_undefined(self):
        with pytest.raises(EntropyUndefinedError):
            entropy_estimate(hist([1, 1, 1]))

    def test_bad_base(self):
        with pytest.raises(ValueError):
            entropy_estimate(hist([2]), base=1.0)


class TestSampleSizes:
    def test_tester_examples(self):
        assert tester_sample_size(10000, 0.5, math.exp(-1), 1) == 200
        assert tester_sample_size(1, 1.0, 0.5, 1) == 2

    def test_tester_linear_in_log_delta(self):
        a = tester_sample_size(10**6, 0.1, math.exp(-3), 1)
        b = tester_sample_size(10**6, 0.1, math.exp(-6), 1)
        assert b == 2 * a

    def test_entropy_examples(self):
        assert entropy_sample_size(0.01, 0.5, math.exp(-1), 1) == 40
        assert entropy_sample_size(1.0, 1 - 1e-12, math.exp(-1), 1) == 2

    def test_entropy_eps_scaling(self):
        a = entropy_sample_size(1e-4, 0.2, 0.01, 1)
        b = entropy_sample_size(1e-4, 0.1, 0.01, 1)
        assert b == pytest.approx(4 * a, abs=4)

    def test_delta_clamp(self):
        assert tester_sample_size(100, 0.5, 0.99, 1) == tester_sample_size(100, 0.5, math.exp(-1), 1)

    @pytest.mark.parametrize(
        "args",
        [(100, 0.5, 0.0, 1), (100, 0.5, 1.0, 1), (100, 0.0, 0.5, 1), (100, 1.5, 0.5, 1), (100, 0.5, 0.5, 0), (0, 0.5, 0.5, 1)],
    )
    def test_tester_rejects(self, args):
        with pytest.raises(ValueError):
            tester_sample_size(*args)

    @pytest.mark.parametrize("args", [(0.0, 0.5, 0.5, 1), (1.5, 0.5, 0.5, 1), (0.1, 1.0, 0.5, 1), (0.1, 0.5, 1.0, 1)])
    def test_entropy_rejects(self, args):
        with pytest.raises(ValueError):
            entropy_sample_size(*args)
