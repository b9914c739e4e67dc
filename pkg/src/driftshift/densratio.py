"""Adaptive-radius estimate of the transformed density ratio ``eta``.

For a query ``x`` the closed balls ``B(x, r)`` are scanned over every
distance ``r`` from ``x`` to a first-half labelled point.  Each ball gives
an interval for ``eta`` and the chosen radius is the largest one whose
running intersection with all smaller balls is still nonempty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .confbands import eta_bounds_arrays
from .core import DomainError, LabeledPool, MetricSpace, MetricSpaceKind


@dataclass(frozen=True, eq=False)
class RadiusProfile:
    """Sorted distances from a query to the first-half points.

    ``distances`` keeps duplicates; ``radii`` holds the distinct values and
    ``counts0``/``counts1`` the number of class-y points within each radius.
    """

    distances: np.ndarray
    radii: np.ndarray
    counts0: np.ndarray
    counts1: np.ndarray
    n0: int
    n1: int

    def __len__(self) -> int:
        return len(self.radii)


@dataclass(frozen=True)
class EtaEstimate:
    value: float
    chosen_radius: float
    intervals_inspected: int


def _first_halves(pool: LabeledPool, space: MetricSpace):
    a0 = space.as_points(pool.first_half(0))
    a1 = space.as_points(pool.first_half(1))
    if len(a0) == 0 or len(a1) == 0:
        raise DomainError("both classes need a nonempty first half")
    return a0, a1


def radius_profile(x, pool: LabeledPool, space: MetricSpace) -> RadiusProfile:
    a0, a1 = _first_halves(pool, space)
    d0 = space.distances(x, a0)
    d1 = space.distances(x, a1)
    dist = np.concatenate([d0, d1])
    is1 = np.concatenate([np.zeros(len(d0), bool), np.ones(len(d1), bool)])
    order = np.argsort(dist, kind="stable")
    dist, is1 = dist[order], is1[order]
    c1 = np.cumsum(is1)
    c0 = np.arange(1, len(dist) + 1) - c1
    last = np.r_[dist[1:] != dist[:-1], True]
    return RadiusProfile(dist, dist[last], c0[last], c1[last], len(a0), len(a1))


def _scan(count0, count1, n0, n1, delta, valid=None):
    """Index of the Lepski radius along the last axis.

    ``valid`` masks positions that are not the last occurrence of a
    repeated distance; those do not take part in the intersection.
    """
    _, _, mid, _, lo, hi = eta_bounds_arrays(count0, count1, n0, n1, delta)
    if valid is not None:
        lo = np.where(valid, lo, -np.inf)
        hi = np.where(valid, hi, np.inf)
    run_lo = np.maximum.accumulate(lo, axis=-1)
    run_hi = np.minimum.accumulate(hi, axis=-1)
    ok = run_lo <= run_hi
    # prefix property: once the running intersection empties it stays empty
    n_ok = ok.sum(axis=-1)
    if valid is None:
        idx = n_ok - 1
    else:
        # last valid position inside the nonempty prefix
        pos = np.arange(ok.shape[-1])
        cand = np.where(valid & (pos < n_ok[..., None]), pos, -1)
        idx = cand.max(axis=-1)
    return idx, mid


def lepski_radius(profile: RadiusProfile, delta: float) -> float:
    return profile.radii[lepski_index(profile, delta)]


def lepski_index(profile: RadiusProfile, delta: float) -> int:
    if len(profile) == 0:
        raise DomainError("empty radius profile")
    idx, _ = _scan(profile.counts0, profile.counts1, profile.n0, profile.n1, delta)
    return int(idx)


def eta_hat(x, pool: LabeledPool, space: MetricSpace, delta: float) -> EtaEstimate:
    prof = radius_profile(x, pool, space)
    idx, mid = _scan(prof.counts0, prof.counts1, prof.n0, prof.n1, delta)
    idx = int(idx)
    return EtaEstimate(float(mid[idx]), float(prof.radii[idx]), idx + 1)


def eta_hat_many(xs, pool: LabeledPool, space: MetricSpace, delta: float,
                 chunk: int = 256):
    """Vectorised :func:`eta_hat` over many query points.

    Returns ``(values, radii)`` arrays; agrees with :func:`eta_hat` exactly.
    """
    a0, a1 = _first_halves(pool, space)
    xs = space.as_points(xs)
    pts = np.concatenate([a0, a1])
    is1 = np.r_[np.zeros(len(a0), bool), np.ones(len(a1), bool)]
    n0, n1 = len(a0), len(a1)
    if space.kind is MetricSpaceKind.EUCLIDEAN_1D:
        # distances to sorted points form a descending run then an ascending
        # one, which the stable (run-merging) sort handles in linear time
        perm = np.argsort(pts, kind="stable")
        pts, is1 = pts[perm], is1[perm]
    values = np.empty(len(xs))
    radii = np.empty(len(xs))
    ranks = np.arange(1, len(pts) + 1)
    for start in range(0, len(xs), chunk):
        block = xs[start:start + chunk]
        dist = space.pairwise(block, pts)
        order = np.argsort(dist, axis=1, kind="stable")
        dist = np.take_along_axis(dist, order, axis=1)
        c1 = np.cumsum(is1[order], axis=1)
        c0 = ranks - c1
        valid = np.concatenate([dist[:, 1:] != dist[:, :-1],
                                np.ones((len(block), 1), bool)], axis=1)
        idx, mid = _scan(c0, c1, n0, n1, delta, valid)
        rows = np.arange(len(block))
        values[start:start + len(block)] = mid[rows, idx]
        radii[start:start + len(block)] = dist[rows, idx]
    return values, radii


def f_hat(x, pool: LabeledPool, space: MetricSpace, delta: float) -> int:
    """Indicator ``2 * eta_hat(x) >= 1``."""
    return int(2.0 * eta_hat(x, pool, space, delta).value >= 1.0)
