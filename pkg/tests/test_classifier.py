import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from driftshift import classifier as clf
from driftshift import sim
from driftshift.core import DomainError, LabeledPool, MetricSpace, make_rng

LINE = MetricSpace.line()


@pytest.fixture(scope="module")
def stationary():
    spec = sim.preset("stationary", n0=1000, T=2000, seed=3)
    scen = sim.generate(spec)
    state = clf.build_state(scen.pool, scen.stream.covariates[:2000], 0.05, 1, LINE)
    return spec, scen, state


class TestBuildState:
    def test_identical_classes(self):
        xs = make_rng(1).normal(size=200)
        state = clf.build_state(LabeledPool(xs, xs.copy()), xs[:50], 0.05, 1, LINE)
        assert state.mean_f0 == state.mean_f1 == 1.0
        pred = clf.classify_at(state, 50, 0.0, 0.01)
        assert pred.pi_hat == 0.5 and pred.degenerate

    def test_empty_prefix(self, gaussian_pool):
        state = clf.build_state(gaussian_pool, np.empty(0), 0.05, 1, LINE)
        assert len(state.fhat_trace) == 0
        assert 0.0 <= state.mean_f0 <= state.mean_f1 <= 1.0
        with pytest.raises(DomainError):
            clf.classify_at(state, 1, 0.0, 0.01)

    def test_trace_is_binary(self, stationary):
        _, _, state = stationary
        assert set(np.unique(state.fhat_trace.values)) <= {0.0, 1.0}

    @pytest.mark.parametrize("delta, bb", [(0.0, 1), (1.0, 1), (0.05, 0)])
    def test_bad_arguments(self, gaussian_pool, delta, bb):
        with pytest.raises(DomainError):
            clf.build_state(gaussian_pool, np.empty(0), delta, bb, LINE)

    @pytest.mark.slow
    def test_mean_gap_tracks_total_variation(self):
        gaps = []
        for seed in range(50):
            spec = sim.preset("stationary", n0=2000, T=1, seed=seed)
            scen = sim.generate(spec)
            state = clf.build_state(scen.pool, np.empty(0), 0.05, 1, LINE)
            gaps.append(state.mean_f1 - state.mean_f0)
        tv = sim.tv_oracle(sim.preset("stationary"))
        assert abs(np.median(gaps) - tv) <= 0.1


class TestClassifyFrom:
    def test_tie_goes_to_zero(self):
        assert clf.classify_from(0.25, 0.75) == 0

    @pytest.mark.parametrize("eta", [0.0, 1e-9, 0.3, 1.0])
    def test_prior_one(self, eta):
        assert clf.classify_from(eta, 1.0) == int(eta > 0)

    @given(st.floats(0, 1))
    def test_prior_zero(self, eta):
        assert clf.classify_from(eta, 0.0) == 0

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
    def test_monotone_in_prior(self, eta, a, b):
        lo, hi = sorted((a, b))
        assert clf.classify_from(eta, lo) <= clf.classify_from(eta, hi)


class TestRoundBudget:
    def test_first_round(self):
        d, clamped = clf.round_budget(0.6, 1)
        assert d == pytest.approx(3.6 / math.pi**2, rel=1e-15) and not clamped

    @pytest.mark.xfail(strict=True, reason="pi^2 delta / 6 for delta=0.6 would need a sum of budgets near 1.6")
    def test_first_round_inverted_constant(self):
        assert clf.round_budget(0.6, 1)[0] == pytest.approx(0.987, abs=1e-3)

    def test_clamp_fires(self):
        assert clf.round_budget(0.9, 1) == (0.5, True)
        assert clf.round_budget(0.9, 2) == (pytest.approx(1.35 / math.pi**2), False)

    def test_unclamped(self):
        d, clamped = clf.round_budget(0.05, 3)
        assert d == pytest.approx(0.3 / (9 * math.pi**2)) and not clamped

    @given(st.floats(1e-6, 0.999), st.integers(1, 5000))
    def test_partial_sums(self, delta, T):
        total = math.fsum(clf.round_budget(delta, t)[0] for t in range(1, T + 1))
        assert total <= delta * (1 + 1e-12)

    def test_basel_limit(self):
        total = math.fsum(clf.round_budget(0.05, t)[0] for t in range(1, 10**6))
        assert total == pytest.approx(0.05, rel=1e-5)


class TestClassifyAt:
    def test_prediction_consistency(self, stationary):
        _, _, state = stationary
        for x in (-1.0, 0.0, 0.7):
            p = clf.classify_at(state, 500, x, 0.01)
            assert p.label == int(p.eta_at_x + p.pi_hat > 1)
            assert 1 <= p.q_hat <= 500

    def test_single_time_uses_global_budget(self, stationary):
        _, _, state = stationary
        p = clf.classify_single(state, 0.3)
        assert p.delta_t == 0.05
        ref = clf.classify_at(state, len(state.fhat_trace), 0.3, 0.05)
        assert p == ref

    def test_cache_does_not_change_results(self, stationary):
        _, scen, state = stationary
        xs = np.linspace(-2, 2, 17)
        cached = state.eta_batch(xs)[0]
        fresh = clf.build_state(scen.pool, np.empty(0), 0.05, 1, LINE).eta_batch(xs)[0]
        np.testing.assert_array_equal(cached, fresh)

    @staticmethod
    def _labels_at_end(state, grid):
        d_t, _ = clf.round_budget(0.05, 2000)
        return np.array([clf.classify_at(state, 2000, x, d_t).label for x in grid])

    @pytest.mark.xfail(strict=True, reason="eta_hat sits at 1/2 on |x| < 0.5, so a small prior error flips that band")
    def test_agrees_with_bayes_rule(self, stationary):
        spec, _, state = stationary
        grid = np.linspace(-2, 2, 201)
        bayes = sim.bayes_rule_pi(spec, 0.5)(grid)
        assert np.mean(self._labels_at_end(state, grid) == bayes) >= 0.95

    def test_agrees_with_bayes_rule_away_from_boundary(self, stationary):
        spec, _, state = stationary
        grid = np.r_[np.linspace(-2, -0.8, 61), np.linspace(0.8, 2, 61)]
        bayes = sim.bayes_rule_pi(spec, 0.5)(grid)
        np.testing.assert_array_equal(self._labels_at_end(state, grid), bayes)


class TestSequentialPolicy:
    def _pool(self, seed=0):
        rng = make_rng(seed, 4)
        return LabeledPool(rng.normal(-1, 1, 400), rng.normal(1, 1, 400))

    def test_one_prediction_per_time(self):
        stream = make_rng(2).normal(size=61)
        out = clf.sequential_policy(self._pool(), stream, 0.05, 1, LINE, (10, 60))
        assert len(out) == 51
        assert [p.delta_t for p in out] == [clf.round_budget(0.05, t)[0] for t in range(10, 61)]

    def test_causality(self):
        stream = make_rng(3).normal(size=81)
        base = clf.sequential_policy(self._pool(), stream, 0.05, 1, LINE, (40, 40))[0]
        mutated = stream.copy()
        mutated[41:] = 5.0
        assert clf.sequential_policy(self._pool(), mutated, 0.05, 1, LINE, (40, 40))[0] == base
        mutated[40] = -5.0
        other = clf.sequential_policy(self._pool(), mutated, 0.05, 1, LINE, (40, 40))[0]
        assert other.pi_hat == base.pi_hat and other.q_hat == base.q_hat

    def test_deterministic(self):
        stream = make_rng(4).normal(size=31)
        a = clf.sequential_policy(self._pool(), stream, 0.05, 1, LINE)
        b = clf.sequential_policy(self._pool(), stream, 0.05, 1, LINE)
        assert a == b

    def test_equal_inputs_equal_labels(self):
        stream = np.r_[make_rng(5).normal(size=20), np.full(20, 0.4)]
        out = clf.sequential_policy(self._pool(), stream, 0.05, 1, LINE, (20, 39))
        keyed = {}
        for p in out:
            keyed.setdefault((p.eta_at_x, p.pi_hat), set()).add(p.label)
        assert all(len(v) == 1 for v in keyed.values())

    @pytest.mark.parametrize("interval", [(0, 5), (3, 40), (6, 5)])
    def test_bad_interval(self, interval):
        with pytest.raises(DomainError):
            clf.sequential_policy(self._pool(), np.zeros(11), 0.05, 1, LINE, interval)
