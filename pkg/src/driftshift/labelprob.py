"""Label-probability estimation from a functional of the unlabelled stream.

The recent history ``f(X_{t-1}), f(X_{t-2}), ...`` is extrapolated to time
``t`` with Legendre weights over a window chosen by a Lepski rule, then
mapped to a prior through the class-conditional means of ``f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .core import DomainError, LabeledPool
from .legendre import (extrapolation_weights, projection_coefficients, radius_for,
                       shifted_legendre_coefficients)


class FunctionalTrace:
    """Append-only record of ``f(X_l)`` values in [0, 1]."""

    def __init__(self, values=()):
        self._values = []
        self.extend(values)

    def append(self, value: float) -> None:
        value = float(value)
        if not 0.0 <= value <= 1.0:
            raise DomainError(f"functional values must lie in [0, 1], got {value}")
        self._values.append(value)

    def extend(self, values) -> None:
        for v in values:
            self.append(v)

    def __len__(self) -> int:
        return len(self._values)

    @property
    def values(self) -> np.ndarray:
        arr = np.array(self._values, dtype=float)
        arr.setflags(write=False)
        return arr


def _as_array(trace) -> np.ndarray:
    if isinstance(trace, FunctionalTrace):
        return trace.values
    return np.asarray(trace, dtype=float)


def q_min(beta_bar: int) -> int:
    if beta_bar < 1:
        raise DomainError("beta_bar must be >= 1")
    return 8 * beta_bar**2 * (beta_bar + 1) ** 2


def marginal_estimate(trace, t: int, q: int, beta_bar: int) -> float:
    """``sum_{i=1..q} v_i f(X_{t-i})``; the value at time ``t`` itself is never read."""
    vals = _as_array(trace)
    if q < 1 or q > t or t > len(vals):
        raise DomainError(f"need 1 <= q <= t <= len(trace); got q={q}, t={t}, len={len(vals)}")
    w = extrapolation_weights(q, beta_bar)
    lagged = vals[t - q:t][::-1]  # f(X_{t-1}), ..., f(X_{t-q})
    return float(w.v @ lagged)


@lru_cache(maxsize=16)
def _coefficient_table(beta_bar: int, q_cap: int):
    """Power-basis coefficients ``B[q-1, k]`` and norms for windows ``1..q_cap``.

    ``mu^(q) = sum_k B[q-1, k] q^{-k} sum_{i<=q} i^k f(X_{t-i})``.
    """
    table = np.zeros((q_cap, beta_bar))
    norms = np.empty(q_cap)
    for q in range(1, q_cap + 1):
        p, a, norm2 = projection_coefficients(q, beta_bar)
        for j in range(p + 1):
            c = shifted_legendre_coefficients(j)
            table[q - 1, :j + 1] += a[j] * c
        norms[q - 1] = norm2
    table.setflags(write=False)
    norms.setflags(write=False)
    return table, norms


def _table_for(beta_bar: int, q_hi: int):
    cap = 64
    while cap < q_hi:
        cap *= 2
    return _coefficient_table(beta_bar, cap)


def _all_window_estimates(vals: np.ndarray, t: int, qs: np.ndarray, beta_bar: int):
    """``mu^(q)`` and ``||v^(q)||`` for every window in ``qs``.

    Uses prefix sums of ``i^k f(X_{t-i})`` so the cost is linear in ``t``.
    """
    table, norms = _table_for(beta_bar, int(qs[-1]))
    lagged = vals[:t][::-1]
    lags = np.arange(1, t + 1, dtype=float)
    qf = qs.astype(float)
    mus = np.zeros(len(qs))
    power = np.ones(t)
    for k in range(beta_bar):
        moment = np.cumsum(lagged * power)[qs - 1]
        mus += table[qs - 1, k] * moment / qf**k
        power = power * lags
    return mus, norms[qs - 1]


@dataclass(frozen=True, eq=False)
class WindowSelection:
    q_hat: int
    qs: np.ndarray
    estimates: np.ndarray
    var_terms: np.ndarray

    @property
    def mu_hat(self) -> float:
        return float(self.estimates[np.searchsorted(self.qs, self.q_hat)])

    def estimate_for(self, q: int) -> float:
        return float(self.estimates[np.searchsorted(self.qs, q)])


def window_grid(t: int, beta_bar: int, geometric: bool = False) -> np.ndarray:
    lo = q_min(beta_bar)
    if t < lo:
        return np.array([t])
    if not geometric:
        return np.arange(lo, t + 1)
    grid = [lo]
    while grid[-1] * 2 < t:
        grid.append(grid[-1] * 2)
    if grid[-1] != t:
        grid.append(t)
    return np.array(grid)


def lepski_window(trace, t: int, delta: float, beta_bar: int,
                  geometric: bool = False) -> WindowSelection:
    """Largest window whose estimate agrees with every smaller admissible window.

    Window ``q`` is admissible when for all smaller ``q'`` on the grid
    ``|mu^(q) - mu^(q')| <= 2 (R_q + R_q')``.  A window that fails does not
    disqualify larger ones.  ``geometric=True`` restricts the grid to
    doublings of the minimal window.
    """
    vals = _as_array(trace)
    if t < 1 or t > len(vals):
        raise DomainError(f"need 1 <= t <= len(trace); got t={t}, len={len(vals)}")
    qs = window_grid(t, beta_bar, geometric)
    mus, norms = _all_window_estimates(vals, t, qs, beta_bar)
    radii = radius_for(norms, qs, delta)
    radii = np.atleast_1d(radii)
    upper = mus + 2.0 * radii
    lower = mus - 2.0 * radii
    # q passes iff lower_q <= min_{q' < q} upper_q' and upper_q >= max_{q' < q} lower_q'
    prev_min_upper = np.r_[np.inf, np.minimum.accumulate(upper)[:-1]]
    prev_max_lower = np.r_[-np.inf, np.maximum.accumulate(lower)[:-1]]
    ok = (lower <= prev_min_upper) & (upper >= prev_max_lower)
    q_hat = int(qs[np.flatnonzero(ok)[-1]])
    return WindowSelection(q_hat, qs, mus, radii)


def second_half_mean(pool: LabeledPool, y: int, f: Callable) -> float:
    """Mean of ``f`` over the second half of the class-``y`` sample.

    ``f`` receives the whole second half as an array and returns one value
    per point.
    """
    pts = pool.second_half(y)
    vals = np.asarray(f(pts), dtype=float)
    if vals.shape != (len(pts),):
        raise DomainError("f must return one value per point")
    return float(np.mean(vals))


@dataclass(frozen=True)
class PriorEstimate:
    pi_hat: float
    mu_hat: float
    mean_f0: float
    mean_f1: float
    degenerate: bool = False


def prior_estimate(mu_hat: float, mean_f0: float, mean_f1: float) -> PriorEstimate:
    if not all(math.isfinite(v) for v in (mu_hat, mean_f0, mean_f1)):
        raise DomainError("prior_estimate needs finite inputs")
    if mean_f0 == mean_f1:
        return PriorEstimate(0.5, mu_hat, mean_f0, mean_f1, degenerate=True)
    ratio = (mu_hat - mean_f0) / (mean_f1 - mean_f0)
    return PriorEstimate(min(max(ratio, 0.0), 1.0), mu_hat, mean_f0, mean_f1)


def clamp01(value: float) -> float:
    return min(max(value, 0.0), 1.0)
