import numpy as np
import pytest

from driftshift import experiment as ex
from driftshift import sim
from driftshift.classifier import build_state, round_budget
from driftshift.core import DomainError
from driftshift.labelprob import lepski_window, prior_estimate


@pytest.fixture(scope="module")
def small_run():
    spec = sim.preset("J-jumps", n0=300, T=200, seed=4)
    return spec, ex.run_replication(spec, ex.EstimatorConfig(cells=400), (50, 200))


class TestRunReplication:
    def test_shape_and_times(self, small_run):
        _, res = small_run
        assert res.rows.shape == (151, len(ex.COLUMNS))
        np.testing.assert_array_equal(res.column("t"), np.arange(50, 201))

    def test_excess_nonnegative(self, small_run):
        _, res = small_run
        assert np.all(res.column("excess") >= -1e-12)

    def test_averaged_is_mean_excess(self, small_run):
        _, res = small_run
        assert res.report.averaged == pytest.approx(res.column("excess").mean(), abs=1e-15)

    def test_matches_policy_prior(self, small_run):
        spec, res = small_run
        scen = sim.generate(spec)
        state = build_state(scen.pool, scen.stream.covariates[:200], 0.05, 1, spec.space)
        for t in (50, 120, 200):
            sel = lepski_window(state.fhat_trace.values, t, round_budget(0.05, t)[0], 1)
            pi_hat = prior_estimate(sel.mu_hat, state.mean_f0, state.mean_f1).pi_hat
            row = res.rows[t - 50]
            assert (row[5], row[6]) == (pi_hat, sel.q_hat)
            assert row[4] == spec.pis[t]

    def test_bayes_column(self, small_run):
        spec, res = small_run
        np.testing.assert_allclose(res.column("bayes_error"), sim.bayes_errors(spec, spec.pis[50:201]))

    def test_cell_error_matches_pointwise_rule(self, small_run):
        spec, res = small_run
        scen = sim.generate(spec)
        state = build_state(scen.pool, scen.stream.covariates[:200], 0.05, 1, spec.space)
        edges, mids = ex.cell_partition(spec, 400)
        labels = (state.eta_batch(mids)[0] + res.rows[-1, 5] > 1).astype(int)
        assert res.rows[-1, 1] == sim.test_error_cells(spec, spec.pis[200], edges, labels)

    def test_discrete_scenario(self):
        table = np.abs(np.subtract.outer(np.arange(3), np.arange(3))).astype(float)
        from driftshift.core import MetricSpace
        spec = sim.ScenarioSpec(MetricSpace.discrete(table), sim.DiscretePMF((0.6, 0.3, 0.1)),
                                sim.DiscretePMF((0.1, 0.3, 0.6)), sim.TrajectorySpec("constant", {"pi": 0.4}),
                                200, 200, 60, 1)
        res = ex.run_replication(spec, ex.EstimatorConfig())
        assert np.all(res.column("excess") >= -1e-12)

    def test_deterministic(self):
        spec = sim.preset("stationary", n0=100, T=40, seed=2)
        a = ex.run_replication(spec, ex.EstimatorConfig(cells=100)).rows
        b = ex.run_replication(spec, ex.EstimatorConfig(cells=100)).rows
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("interval", [(0, 10), (5, 41), (9, 8)])
    def test_bad_interval(self, interval):
        with pytest.raises(DomainError):
            ex.run_replication(sim.preset("stationary", n0=20, T=40), ex.EstimatorConfig(), interval)

    @pytest.mark.parametrize("kw", [{"delta": 1.0}, {"beta_bar": 0}, {"cells": 1}])
    def test_bad_config(self, kw):
        with pytest.raises(DomainError):
            ex.EstimatorConfig(**kw)


class TestBaselines:
    def test_fixed_rule_zero_when_stationary(self):
        spec = sim.preset("stationary", n0=10, T=100)
        assert ex.fixed_rule_regret(spec, (50, 100)) == pytest.approx(0.0, abs=1e-12)

    def test_fixed_rule_positive_under_drift(self):
        spec = sim.preset("slow-sine", n0=10, T=400)
        assert ex.fixed_rule_regret(spec, (200, 400)) > 0

    def test_pi_errors_columns(self):
        spec = sim.preset("stationary", n0=200, T=60, seed=1)
        rows = ex.pi_errors(spec, ex.EstimatorConfig(), [10, 60])
        assert rows.shape == (2, 5)
        np.testing.assert_array_equal(rows[:, 4], np.abs(rows[:, 2] - rows[:, 1]))
