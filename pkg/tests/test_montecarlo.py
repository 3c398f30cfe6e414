"""Simulation against exact oracles, limit laws and its own determinism contract."""
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from cardcyclic import limits, montecarlo as mc
from cardcyclic.exact import (
    EventSpec,
    brute_force_dist,
    event_prob,
    exact_table,
    first_pos_prob,
    last_pos_prob,
    tv_to_uniform,
)
from cardcyclic.perm import all_permutations, identity, sample_shuffle


def within(fractions, exact, reps, k):
    """Every cell within ``k`` binomial standard errors of its exact value."""
    exact = np.array([float(x) for x in exact])
    se = np.sqrt(exact * (1 - exact) / reps)
    return bool(np.all(np.abs(np.asarray(fractions) - exact) <= k * se + 1e-15))


class TestKernels:
    @pytest.mark.parametrize("n", [1, 2, 3, 7, 31, 32, 33, 64, 200])
    def test_full_kernel_matches_reference(self, n):
        pos = mc.final_positions(n, 40, seed=n)
        for i in range(40):
            deck = sample_shuffle(identity(n), n, i)
            assert tuple(pos[i]) == deck.positions()

    @pytest.mark.parametrize("n,L", [(1, 1), (5, 2), (40, 7), (40, 40), (300, 48)])
    def test_trackers_match_full_kernel(self, n, L):
        pos = mc.final_positions(n, 60, seed=3)
        decks = np.argsort(pos, axis=1) + 1
        assert np.array_equal(mc.leading_cards(n, L, 60, seed=3), decks[:, :L])
        assert np.array_equal(mc.trailing_cards(n, L, 60, seed=3), decks[:, n - L :])

    def test_rows_are_permutations(self):
        pos = mc.final_positions(1000, 20, seed=1)
        assert all(sorted(r) == list(range(1, 1001)) for r in pos)


class TestDeterminism:
    def test_same_seed_same_histogram(self):
        a = mc.sample_position_hist(50, 10, 3000, seed=4)
        b = mc.sample_position_hist(50, 10, 3000, seed=4)
        assert np.array_equal(a.bins, b.bins)

    def test_independent_of_threads(self):
        a = mc.final_positions(200, 3000, seed=8, threads=1)
        b = mc.final_positions(200, 3000, seed=8, threads=3)
        assert np.array_equal(a, b)

    def test_independent_of_batching(self, monkeypatch):
        a = mc.leading_cards(300, 5, 500, seed=2)
        monkeypatch.setattr(mc, "WORDS_PER_CHUNK", 1000)
        assert len(mc._chunks(500, 300)) == 167
        b = mc.leading_cards(300, 5, 500, seed=2)
        assert np.array_equal(a, b)

    def test_sample_i_is_stream_i(self):
        pos = mc.final_positions(9, 5, seed=77)
        assert tuple(pos[3]) == sample_shuffle(identity(9), 77, 3).positions()

    def test_validation(self):
        with pytest.raises(ValueError):
            mc.final_positions(0, 1, 1)
        with pytest.raises(ValueError):
            mc.final_positions(3, 0, 1)
        with pytest.raises(ValueError):
            mc.final_positions(3, 1, -1)
        with pytest.raises(ValueError):
            mc.final_positions(3, 1, 1, threads=0)


class TestHistogram:
    def test_single_card(self):
        h = mc.sample_position_hist(1, 1, 100, seed=0)
        assert list(h.bins) == [100]

    def test_invariants(self):
        h = mc.sample_first_card_hist(20, 999, seed=1)
        assert h.bins.sum() == h.reps == 999
        assert h.cdf()[-1] == pytest.approx(1)
        rows = h.rows()
        assert len(rows) == 20 and set(rows[0]) == {"card", "count", "fraction", "stderr"}
        with pytest.raises(ValueError):
            mc.Histogram(3, np.array([1, 2, 3]), 5, 0)

    def test_window_mean(self):
        h = mc.Histogram(9, np.array([9, 0, 0, 0, 0, 0, 0, 0, 9]), 18, 0)
        assert h.window_mean(1, 3) == pytest.approx(9 / 18 / 3)
        assert h.window_mean(5, 3) == 0
        assert h.window_mean(9) == pytest.approx(9 / 18 / 3)

    def test_card_out_of_range(self):
        with pytest.raises(ValueError):
            mc.sample_position_hist(5, 6, 10, 0)


class TestSmallDecksAgainstExact:
    reps = 1_000_000

    def test_position_of_middle_card(self):
        h = mc.sample_position_hist(3, 2, self.reps, seed=11)
        exact = brute_force_dist(3).marginal(lambda s: s.position_of(2))
        assert within(h.fractions, exact.values(), self.reps, 3)

    def test_first_card(self):
        h = mc.sample_first_card_hist(3, self.reps, seed=12)
        assert within(h.fractions, [Fraction(10, 27), Fraction(8, 27), Fraction(9, 27)], self.reps, 3)

    def test_last_card(self):
        h = mc.sample_last_card_hist(3, self.reps, seed=13)
        assert within(h.fractions, [Fraction(8, 27), Fraction(10, 27), Fraction(9, 27)], self.reps, 3)

    def test_whole_table(self):
        pos = mc.final_positions(3, self.reps, seed=14)
        decks = Counter(map(tuple, np.argsort(pos, axis=1) + 1))
        table = exact_table(3)
        perms = list(all_permutations(3))
        freq = [decks[p.entries] / self.reps for p in perms]
        assert within(freq, [table.prob(p).fraction for p in perms], self.reps, 3)

    def test_event(self):
        est = mc.estimate_event_A(3, 1, 1, self.reps, seed=15)
        exact = event_prob(EventSpec(1, 1), exact_table(3)).fraction
        assert within([est.estimate], [exact], self.reps, 3)

    def test_five_card_estimators(self):
        reps = 400_000
        table = exact_table(5)
        first = mc.sample_first_card_hist(5, reps, seed=16)
        assert within(first.fractions, table.marginal(lambda s: s.card_at(1)).values(), reps, 4)
        last = mc.sample_last_card_hist(5, reps, seed=17)
        assert within(last.fractions, table.marginal(lambda s: s.card_at(5)).values(), reps, 4)
        for j in (1, 3, 5):
            h = mc.sample_position_hist(5, j, reps, seed=18 + j)
            assert within(h.fractions, table.marginal(lambda s, j=j: s.position_of(j)).values(), reps, 4)
        for M, L in ((1, 1), (1, 2), (1.5, 3)):
            est = mc.estimate_event_A(5, M, L, reps, seed=30)
            assert within([est.estimate], [event_prob(EventSpec(M, L), table).fraction], reps, 4)


class TestLargeDecks:
    def test_top_card_uniform(self):
        n, reps = 200, 100_000
        h = mc.sample_position_hist(n, n, reps, seed=21)
        assert within(h.fractions, [1 / n] * n, reps, 4)

    def test_position_law(self):
        n, reps = 500, 20_000
        h = mc.sample_position_hist(n, n // 2, reps, seed=22)
        xs = np.repeat(np.arange(1, n + 1) / n, h.bins)
        assert mc.ecdf_sup_distance(xs, lambda x: limits.F(0.5, x)) < 0.03

    def test_first_card_window(self):
        n, reps = 1000, 200_000
        h = mc.sample_first_card_hist(n, reps, seed=23)
        w = math.isqrt(n)
        lo = n // 2 - w // 2
        got = h.window_mean(n // 2)
        want = sum(first_pos_prob(n, j).value for j in range(lo, lo + w)) / w
        se = math.sqrt(want * w / reps) / w
        assert abs(got - want) < 4 * se
        assert n * got == pytest.approx(math.exp(-0.5), rel=0.05)

    def test_last_card_near_top(self):
        n, reps = 1000, 200_000
        h = mc.sample_last_card_hist(n, reps, seed=24)
        p = last_pos_prob(n, n - 1).value
        assert abs(h.fractions[n - 2] - p) < 4 * math.sqrt(p / reps)
        assert n * p == pytest.approx((math.e - math.exp(-1)) / (math.e - 1), rel=0.01)


class TestJoint:
    def test_duplicates(self):
        with pytest.raises(ValueError):
            mc.joint_position_sample(10, [3, 3], 10, 0)

    def test_single_card_is_position_hist(self):
        j = mc.joint_position_sample(40, [7], 500, seed=5)
        h = mc.sample_position_hist(40, 7, 500, seed=5)
        assert np.array_equal(j.marginal(0).bins, h.bins)

    def test_independence_diagnostic(self):
        n, reps = 400, 20_000
        j = mc.joint_position_sample(n, [int(0.3 * n), int(0.7 * n)], reps, seed=6)
        assert j.independence_gap() < 0.03
        assert j.left_of_frequency() == pytest.approx(limits.pair_inversion_prob(0.3, 0.7), abs=0.015)

    def test_dependence_is_detected(self):
        """Same card twice in disguise: a perfectly dependent pair is far from product form."""
        j = mc.JointSample(4, (1, 2), np.array([[1, 1], [2, 2], [3, 3], [4, 4]] * 10), 40, 0)
        assert j.independence_gap() > 0.15

    def test_ecdf_distance(self):
        xs = np.array([0.25, 0.5, 0.75, 1.0])
        assert mc.ecdf_sup_distance(xs, lambda x: x) == pytest.approx(0.25)


class TestEvent:
    def test_full_event(self):
        n = 16
        est = mc.estimate_event_A(n, 4, n - 1, 2000, seed=1)
        assert est.estimate == 1 and est.uniform == 1

    def test_fields(self):
        est = mc.estimate_event_A(400, 1, 3, 5000, seed=2)
        assert est.gap == pytest.approx(est.estimate - est.uniform)
        assert 0 < est.stderr < 0.01

    def test_requires_L_below_n(self):
        with pytest.raises(ValueError):
            mc.estimate_event_A(10, 1, 10, 10, 0)


def convolve_oracle(n, m):
    """Distribution after m passes by direct Fraction convolution over S_n."""
    step = {p: c.fraction for p, c in exact_table(n).items()}
    mu = {identity(n): Fraction(1)}
    for _ in range(m):
        nxt = Counter()
        for s, a in mu.items():
            for p, b in step.items():
                nxt[s.compose(p)] += a * b
        mu = nxt
    return mu


class TestWalk:
    def test_base_case(self):
        r = mc.convolution_walk(mc.WalkConfig(3, 1))
        assert r.exact and r.steps[0].tv_exact == tv_to_uniform(3) == Fraction(1, 18)

    @pytest.mark.parametrize("n,m", [(3, 4), (4, 3)])
    def test_against_oracle(self, n, m):
        r = mc.convolution_walk(mc.WalkConfig(n, m))
        mu = convolve_oracle(n, m)
        u = Fraction(1, math.factorial(n))
        want = sum(abs(mu.get(p, 0) - u) for p in all_permutations(n)) / 2
        assert r.steps[-1].tv_exact == want

    def test_two_steps_by_sampling(self):
        """The second step composes as deck-then-shuffle."""
        n, reps = 3, 60_000
        mu = convolve_oracle(n, 2)
        counts = Counter()
        for s in range(reps):
            d = sample_shuffle(identity(n), 99, 2 * s)
            counts[sample_shuffle(d, 99, 2 * s + 1)] += 1
        perms = list(all_permutations(n))
        assert within([counts[p] / reps for p in perms], [mu[p] for p in perms], reps, 4)

    def test_decreases_to_zero(self):
        tv = mc.convolution_walk(mc.WalkConfig(3, 50)).tv()
        assert all(a > b for a, b in zip(tv, tv[1:]))
        assert tv[-1] < 1e-6

    def test_sampled(self):
        cfg = mc.WalkConfig(60, 4, reps=3000, seed=3)
        r = mc.convolution_walk(cfg)
        assert not r.exact and r.kind.startswith("lower bound")
        assert [s.m for s in r.steps] == [1, 2, 3, 4]
        assert r.steps[0].tv > 0.3
        assert r.steps[0].tv > r.steps[-1].tv
        assert all(s.stderr > 0 for s in r.steps)
        again = mc.convolution_walk(cfg, threads=2)
        assert again.tv() == r.tv()

    def test_sampled_first_step_matches_event(self):
        cfg = mc.WalkConfig(80, 1, reps=4000, seed=9, events=((1.0, 2),), pairs=())
        step = mc.convolution_walk(cfg).steps[0]
        est = mc.estimate_event_A(80, 1.0, 2, 4000, seed=9)
        assert step.tv == pytest.approx(abs(est.gap))

    def test_collapsed_pairs_dropped(self):
        cfg = mc.WalkConfig(8, 1, reps=2000, seed=1, events=())
        assert mc._pair_cards(cfg) == [(2, 5), (1, 7)]
        step = mc.convolution_walk(cfg).steps[0]
        assert step.tv < 0.2 and "card 4 left of card 4" not in step.statistic

    def test_config_validation(self):
        with pytest.raises(ValueError):
            mc.WalkConfig(3, 0)
