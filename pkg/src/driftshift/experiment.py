"""Replication harness: run the sequential policy on a scenario and score it exactly.

On the line the learned density-ratio estimate is frozen onto a fine cell
partition, so each round's classifier is constant on cells and its test
error is an exact sum of CDF differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import sim
from .classifier import build_state, round_budget
from .core import DomainError
from .labelprob import lepski_window, prior_estimate

DEFAULT_CELLS = 2000
COLUMNS = ("t", "test_error", "bayes_error", "excess", "pi_true", "pi_hat", "q_hat")


@dataclass(frozen=True)
class EstimatorConfig:
    delta: float = 0.05
    beta_bar: int = 1
    cells: int = DEFAULT_CELLS

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise DomainError("delta must lie in (0, 1)")
        if self.beta_bar < 1 or self.cells < 2:
            raise DomainError("beta_bar must be >= 1 and cells >= 2")


@dataclass(frozen=True, eq=False)
class RunResult:
    rows: np.ndarray  # one row per t, columns as in COLUMNS
    report: sim.RegretReport

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, COLUMNS.index(name)]


def cell_partition(spec: sim.ScenarioSpec, cells: int):
    """Edges with infinite outer ends and one representative point per cell."""
    lo = min(spec.class_cond0.support()[0], spec.class_cond1.support()[0])
    hi = max(spec.class_cond0.support()[1], spec.class_cond1.support()[1])
    inner = np.linspace(lo, hi, cells + 1)
    mids = 0.5 * (inner[:-1] + inner[1:])
    edges = inner.copy()
    edges[0], edges[-1] = -np.inf, np.inf
    return edges, mids


def run_replication(spec: sim.ScenarioSpec, est: EstimatorConfig,
                    interval: Optional[Tuple[int, int]] = None) -> RunResult:
    """Per-round test error of the policy against the Bayes error for ``t`` in ``interval``."""
    scen = sim.generate(spec)
    T = spec.T
    lo, hi = interval if interval is not None else (1, T)
    if lo < 1 or hi > T or lo > hi:
        raise DomainError(f"interval must lie within [1, {T}]")
    covs = scen.stream.covariates
    state = build_state(scen.pool, covs[:hi], est.delta, est.beta_bar, spec.space)
    if spec.discrete:
        points = np.arange(spec.space.n_symbols)
        edges = None
    else:
        edges, points = cell_partition(spec, est.cells)
    eta_pts, _ = state.eta_batch(points)
    bayes = sim.bayes_errors(spec, spec.pis[lo:hi + 1])
    trace = state.fhat_trace.values
    rows = np.empty((hi - lo + 1, len(COLUMNS)))
    for k, t in enumerate(range(lo, hi + 1)):
        d_t, _ = round_budget(est.delta, t)
        sel = lepski_window(trace, t, d_t, est.beta_bar)
        pi_hat = prior_estimate(sel.mu_hat, state.mean_f0, state.mean_f1).pi_hat
        labels = (eta_pts + pi_hat > 1.0).astype(int)
        pi_t = float(spec.pis[t])
        if spec.discrete:
            err = sim.test_error_pi(spec, pi_t, lambda s: labels[np.asarray(s, int)])
        else:
            err = sim.test_error_cells(spec, pi_t, edges, labels)
        b = float(bayes[k])
        rows[k] = (t, err, b, err - b, pi_t, pi_hat, sel.q_hat)
    report = sim.RegretReport(rows[:, 0].astype(int), rows[:, 1], rows[:, 2], (lo, hi))
    return RunResult(rows, report)


def fixed_rule_regret(spec: sim.ScenarioSpec, interval: Tuple[int, int],
                      pi_fixed: Optional[float] = None) -> float:
    """Regret of the rule that is Bayes for a stationary prior ``pi_fixed``.

    ``pi_fixed`` defaults to the mean label probability over the interval,
    i.e. the best a drift-blind learner with oracle ``eta`` could assume.
    """
    lo, hi = interval
    pis = spec.pis[lo:hi + 1]
    if pi_fixed is None:
        pi_fixed = float(np.mean(pis))
    rule = sim.bayes_rule_pi(spec, pi_fixed)
    if spec.discrete:
        err = [sim.test_error_pi(spec, float(p), rule) for p in pis]
    else:
        edges, labels = sim.rule_cells(spec, rule)
        err = [sim.test_error_cells(spec, float(p), edges, labels) for p in pis]
    excess = np.asarray(err) - sim.bayes_errors(spec, pis)
    return sim.dynamic_regret(np.arange(lo, hi + 1), excess, interval)


def pi_errors(spec: sim.ScenarioSpec, est: EstimatorConfig, times) -> np.ndarray:
    """``(t, pi_true, pi_hat, q_hat, abs_err)`` rows for the requested times."""
    scen = sim.generate(spec)
    times = np.asarray(times, int)
    covs = scen.stream.covariates
    state = build_state(scen.pool, covs[:int(times.max())], est.delta, est.beta_bar, spec.space)
    trace = state.fhat_trace.values
    out = np.empty((len(times), 5))
    for k, t in enumerate(times):
        d_t, _ = round_budget(est.delta, int(t))
        sel = lepski_window(trace, int(t), d_t, est.beta_bar)
        pi_hat = prior_estimate(sel.mu_hat, state.mean_f0, state.mean_f1).pi_hat
        pi_t = float(spec.pis[t])
        out[k] = (t, pi_t, pi_hat, sel.q_hat, abs(pi_hat - pi_t))
    return out

