"""Plug-in classifier ``1{eta_hat(x) + pi_hat_t > 1}`` and the sequential policy."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .core import DomainError, LabeledPool, MetricSpace
from .densratio import EtaEstimate, eta_hat_many
from .labelprob import FunctionalTrace, lepski_window, prior_estimate

log = logging.getLogger(__name__)

DELTA_T_CAP = 0.5


@dataclass(eq=False)
class ClassifierState:
    """Everything the policy learns before the stream starts.

    ``eta_cache`` maps a point key to its :class:`EtaEstimate`; it only
    saves work and never changes a result.
    """

    pool: LabeledPool
    space: MetricSpace
    delta: float
    beta_bar: int
    mean_f0: float
    mean_f1: float
    fhat_trace: FunctionalTrace
    eta_stream: np.ndarray
    eta_cache: dict = field(default_factory=dict, repr=False)

    def _key(self, x):
        return tuple(np.atleast_1d(np.asarray(x)).tolist())

    def eta_batch(self, xs) -> Tuple[np.ndarray, np.ndarray]:
        pts = self.space.as_points(xs)
        keys = [self._key(p) for p in pts]
        missing = [i for i, k in enumerate(keys) if k not in self.eta_cache]
        if missing:
            vals, radii = eta_hat_many(pts[missing], self.pool, self.space, self.delta)
            for i, v, r in zip(missing, vals, radii):
                self.eta_cache[keys[i]] = EtaEstimate(float(v), float(r), -1)
        vals = np.array([self.eta_cache[k].value for k in keys])
        radii = np.array([self.eta_cache[k].chosen_radius for k in keys])
        return vals, radii

    def eta(self, x) -> float:
        return float(self.eta_batch([x])[0][0])

    def f_hat(self, xs) -> np.ndarray:
        """``1{2 eta_hat(x) >= 1}`` for each point."""
        vals, _ = self.eta_batch(xs)
        return (2.0 * vals >= 1.0).astype(float)


@dataclass(frozen=True)
class Prediction:
    label: int
    pi_hat: float
    eta_at_x: float
    q_hat: int
    delta_t: float = math.nan
    clamped: bool = False
    degenerate: bool = False


def build_state(pool: LabeledPool, stream_prefix, delta: float, beta_bar: int,
                space: MetricSpace) -> ClassifierState:
    """Fit ``eta_hat`` on first halves, class means of ``f_hat`` on second halves,
    and evaluate ``f_hat`` along ``stream_prefix``."""
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    if beta_bar < 1:
        raise DomainError("beta_bar must be >= 1")
    state = ClassifierState(pool, space, delta, beta_bar, math.nan, math.nan,
                            FunctionalTrace(), np.empty(0))
    state.mean_f0 = float(np.mean(state.f_hat(pool.second_half(0))))
    state.mean_f1 = float(np.mean(state.f_hat(pool.second_half(1))))
    prefix = space.as_points(stream_prefix) if len(stream_prefix) else np.empty(0)
    if len(prefix):
        eta_vals, _ = state.eta_batch(prefix)
        state.eta_stream = eta_vals
        state.fhat_trace.extend((2.0 * eta_vals >= 1.0).astype(float))
    return state


def classify_from(eta_x: float, pi_hat: float) -> int:
    """Strict plug-in threshold; ties go to label 0."""
    return int(eta_x + pi_hat > 1.0)


def classify_at(state: ClassifierState, t: int, x, delta_t: float,
                clamped: bool = False) -> Prediction:
    """Predict at time ``t`` using ``f_hat`` values strictly before ``t``."""
    if t < 1:
        raise DomainError("prediction times start at t = 1")
    if t > len(state.fhat_trace):
        raise DomainError(f"trace covers {len(state.fhat_trace)} steps; cannot predict at t={t}")
    sel = lepski_window(state.fhat_trace.values, t, delta_t, state.beta_bar)
    prior = prior_estimate(sel.mu_hat, state.mean_f0, state.mean_f1)
    eta_x = state.eta(x)
    return Prediction(classify_from(eta_x, prior.pi_hat), prior.pi_hat, eta_x,
                      sel.q_hat, delta_t, clamped, prior.degenerate)


def classify_single(state: ClassifierState, x) -> Prediction:
    """One-shot classifier at the end of the observed stream with budget ``delta``."""
    return classify_at(state, len(state.fhat_trace), x, state.delta)


def round_budget(delta: float, t: int) -> Tuple[float, bool]:
    """``6 delta / (pi^2 t^2)``, capped at :data:`DELTA_T_CAP`; sums to ``delta`` over ``t >= 1``."""
    raw = 6.0 * delta / (math.pi**2 * t * t)
    if raw > DELTA_T_CAP:
        return DELTA_T_CAP, True
    return raw, False


def sequential_policy(pool: LabeledPool, stream, delta: float, beta_bar: int,
                      space: MetricSpace, interval: Optional[Tuple[int, int]] = None,
                      state: Optional[ClassifierState] = None) -> List[Prediction]:
    """Predictions for every ``t`` in ``interval`` (inclusive).

    ``stream`` holds covariates ``X_0..X_L``; the prediction at ``t`` reads
    ``f_hat(X_0..X_{t-1})`` and queries ``X_t``.
    """
    covs = stream.covariates if hasattr(stream, "covariates") else stream
    covs = space.as_points(covs)
    last = len(covs) - 1
    lo, hi = interval if interval is not None else (1, last)
    if lo < 1 or hi > last or lo > hi:
        raise DomainError(f"interval must lie within [1, {last}]")
    if state is None:
        state = build_state(pool, covs[:hi], delta, beta_bar, space)
    state.eta_batch(covs[lo:hi + 1])
    out = []
    for t in range(lo, hi + 1):
        d_t, clamped = round_budget(delta, t)
        if clamped:
            log.info("per-round budget capped at %s for t=%d", DELTA_T_CAP, t)
        out.append(classify_at(state, t, covs[t], d_t, clamped))
    return out
