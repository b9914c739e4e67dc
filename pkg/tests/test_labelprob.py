import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from driftshift import labelprob as lp
from driftshift.core import DomainError, LabeledPool, make_rng
from driftshift.legendre import extrapolation_weights, variance_term


def brute_force_window(vals, t, delta, bb):
    lo = lp.q_min(bb)
    if t < lo:
        return t
    qs = range(lo, t + 1)
    mu, rad = {}, {}
    for q in qs:
        w = extrapolation_weights(q, bb)
        mu[q] = sum(w.v[i - 1] * vals[t - i] for i in range(1, q + 1))
        rad[q] = variance_term(w, delta)
    ok = [q for q in qs if all(abs(mu[q] - mu[r]) <= 2 * (rad[q] + rad[r]) for r in range(lo, q))]
    return max(ok)


class TestQMin:
    @pytest.mark.parametrize("bb, expected", [(1, 32), (2, 288), (3, 1152)])
    def test_values(self, bb, expected):
        assert lp.q_min(bb) == expected


class TestFunctionalTrace:
    def test_append_and_read_only(self):
        tr = lp.FunctionalTrace([0.0, 1.0])
        tr.append(0.5)
        assert len(tr) == 3
        with pytest.raises(ValueError):
            tr.values[0] = 1.0

    @pytest.mark.parametrize("bad", [-0.1, 1.5, float("nan")])
    def test_rejects_out_of_range(self, bad):
        with pytest.raises(DomainError):
            lp.FunctionalTrace().append(bad)


class TestMarginalEstimate:
    @given(st.floats(0, 1), st.integers(1, 60), st.integers(1, 3))
    def test_constant_trace(self, c, q, bb):
        vals = np.full(80, c)
        assert lp.marginal_estimate(vals, 70, q, bb) == pytest.approx(c, abs=1e-12)

    def test_mean_for_beta_bar_one(self):
        vals = make_rng(1).random(50)
        assert lp.marginal_estimate(vals, 40, 10, 1) == pytest.approx(vals[30:40].mean(), rel=1e-14)

    def test_linear_two_point(self):
        vals = 0.1 + 0.01 * np.arange(30)
        t = 20
        assert lp.marginal_estimate(vals, t, 2, 2) == pytest.approx(2 * vals[t - 1] - vals[t - 2], abs=1e-14)
        assert lp.marginal_estimate(vals, t, 2, 2) == pytest.approx(vals[t], abs=1e-14)

    def test_never_reads_time_t(self):
        vals = make_rng(2).random(30)
        other = vals.copy()
        other[15:] = 0.0
        assert lp.marginal_estimate(vals, 15, 9, 2) == lp.marginal_estimate(other, 15, 9, 2)

    @given(st.integers(0, 1000), st.integers(3, 120), st.integers(1, 3), st.floats(-2, 2))
    def test_linear_in_trace(self, seed, q, bb, c):
        rng = make_rng(seed)
        a, b = rng.random(150), rng.random(150)
        lhs = lp.marginal_estimate(np.clip(a * 0.5 + b * 0.5, 0, 1), 130, q, bb)
        rhs = 0.5 * lp.marginal_estimate(a, 130, q, bb) + 0.5 * lp.marginal_estimate(b, 130, q, bb)
        assert lhs == pytest.approx(rhs, abs=1e-10)

    @given(st.integers(0, 1000), st.integers(4, 200))
    def test_exact_on_quadratic_trace(self, seed, q):
        c = make_rng(seed).uniform(-0.3, 0.3, 3)
        t = 250
        ell = np.arange(t + 1)
        vals = 0.5 + c[0] * ((t - ell) / t) + c[1] * ((t - ell) / t) ** 2
        if not np.all((0 <= vals) & (vals <= 1)):
            return
        assert lp.marginal_estimate(vals, t, q, 3) == pytest.approx(vals[t], abs=1e-9)

    def test_bad_window(self):
        with pytest.raises(DomainError):
            lp.marginal_estimate(np.zeros(10), 5, 6, 1)


class TestLepskiWindow:
    def test_constant_trace_uses_all(self):
        sel = lp.lepski_window(np.full(300, 0.4), 300, 0.05, 1)
        assert sel.q_hat == 300
        assert sel.mu_hat == pytest.approx(0.4)

    def test_short_history(self):
        assert lp.lepski_window(np.ones(5), 5, 0.05, 1).q_hat == 5

    def test_step_trace_matches_brute_force(self):
        vals = np.r_[np.zeros(100), np.ones(100)]
        assert lp.lepski_window(vals, 200, 0.1, 1).q_hat == brute_force_window(vals, 200, 0.1, 1)

    @pytest.mark.xfail(strict=True, reason="the variance radii at t=200 (0.4 to 0.85) admit a 0-to-1 step")
    def test_step_trace_shrinks_window(self):
        vals = np.r_[np.zeros(100), np.ones(100)]
        assert lp.lepski_window(vals, 200, 0.1, 1).q_hat < 200

    def test_large_step_is_detected(self):
        # with a long history on each side the radii shrink enough to reject
        vals = np.r_[np.zeros(20_000), np.ones(20_000)]
        sel = lp.lepski_window(vals, 40_000, 0.1, 1)
        assert sel.q_hat < 40_000
        assert sel.mu_hat > 0.6

    @given(st.integers(0, 10_000), st.integers(1, 3), st.integers(40, 400))
    def test_matches_brute_force_random(self, seed, bb, t):
        rng = make_rng(seed)
        jump = rng.integers(1, t)
        vals = np.where(np.arange(t) < jump, rng.random() * 0.2, 0.8 + 0.2 * rng.random())
        vals = np.clip(vals + rng.normal(0, 0.02, t), 0, 1)
        if t > 600:
            return
        assert lp.lepski_window(vals, t, 0.3, bb).q_hat == brute_force_window(vals, t, 0.3, bb)

    @given(st.integers(0, 10_000), st.sampled_from([0.125, 0.25, -0.125]))
    def test_shift_invariance(self, seed, c):
        rng = make_rng(seed)
        vals = np.r_[np.full(150, 0.25), np.full(150, 0.625)] + rng.integers(0, 2, 300) / 8
        a = lp.lepski_window(vals, 300, 0.5, 1)
        b = lp.lepski_window(vals + c, 300, 0.5, 1)
        assert a.q_hat == b.q_hat
        np.testing.assert_allclose(b.estimates - a.estimates, c, atol=1e-12)

    def test_geometric_grid(self):
        qs = lp.window_grid(1000, 1, geometric=True)
        assert list(qs) == [32, 64, 128, 256, 512, 1000]

    def test_stationary_consistency(self):
        mu, t = 0.3, 2000
        errs = []
        for seed in range(100):
            vals = (make_rng(seed, 9).random(t) < mu).astype(float)
            errs.append(abs(lp.lepski_window(vals, t, 0.05, 1).mu_hat - mu))
        assert np.median(errs) <= 3 * math.sqrt(math.log(t / 0.05) / t)


class TestSecondHalfMean:
    def test_constant(self):
        pool = LabeledPool(np.arange(6.0), np.arange(8.0))
        assert lp.second_half_mean(pool, 1, lambda x: np.ones(len(x))) == 1.0

    def test_half_indicator(self):
        pool = LabeledPool(np.arange(8.0), np.arange(2.0))
        # second half is 4..7; two of four are >= 6
        assert lp.second_half_mean(pool, 0, lambda x: (x >= 6).astype(float)) == 0.5

    def test_direct_sum(self):
        rng = make_rng(5)
        pool = LabeledPool(rng.normal(size=40), rng.normal(size=20))
        vals = rng.random(20)
        f = lambda x: vals[: len(x)]
        assert lp.second_half_mean(pool, 0, f) == pytest.approx(math.fsum(vals) / 20, abs=1e-15)

    def test_wrong_shape(self):
        pool = LabeledPool(np.arange(4.0), np.arange(4.0))
        with pytest.raises(DomainError):
            lp.second_half_mean(pool, 0, lambda x: np.ones(1))


class TestPriorEstimate:
    def test_lower_end(self):
        assert lp.prior_estimate(0.2, 0.2, 0.7).pi_hat == 0.0

    def test_midpoint(self):
        assert lp.prior_estimate(0.45, 0.2, 0.7).pi_hat == pytest.approx(0.5)

    def test_degenerate(self):
        est = lp.prior_estimate(0.9, 0.3, 0.3)
        assert (est.pi_hat, est.degenerate) == (0.5, True)

    def test_upper_end(self):
        assert lp.prior_estimate(0.7, 0.2, 0.7).pi_hat == 1.0

    @given(st.floats(-1, 2), st.floats(0, 1), st.floats(0, 1))
    def test_in_unit_interval(self, mu, m0, m1):
        assert 0.0 <= lp.prior_estimate(mu, m0, m1).pi_hat <= 1.0

    def test_non_finite_rejected(self):
        with pytest.raises(DomainError):
            lp.prior_estimate(float("nan"), 0.1, 0.2)
