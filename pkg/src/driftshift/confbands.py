"""Uncertainty functions and interval arithmetic for class-conditional ball masses.

All uncertainty functions broadcast over numpy arrays; scalars go in and
come out as Python floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import DomainError, eps_iterlog


def sigma_sq(q):
    """Bernoulli variance ``q (1 - q)``."""
    q = np.asarray(q, dtype=float)
    out = q * (1.0 - q)
    return float(out) if out.ndim == 0 else out


def empirical_uncertainty_flat(q, eps):
    q = np.asarray(q, dtype=float)
    root = np.sqrt(eps * q * (1.0 - q) + eps * eps)
    out = 8.0 * (root + (1.0 - 2.0 * q) * eps) / (3.0 * (1.0 + 2.0 * eps))
    # the two summands cancel exactly at q = 1; clip the rounding residue
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def population_uncertainty_flat(p, eps):
    p = np.asarray(p, dtype=float)
    root = np.sqrt(9.0 * eps * p * (1.0 - p) + eps * eps)
    out = np.maximum(8.0 * (root + (1.0 - 2.0 * p) * eps) / (9.0 + 2.0 * eps), 0.0)
    return float(out) if out.ndim == 0 else out


def empirical_uncertainty(q, n: int, delta: float):
    out = np.maximum(empirical_uncertainty_flat(q, eps_iterlog(n, delta)), 1.0 / n)
    return float(out) if np.ndim(out) == 0 else out


def population_uncertainty(p, n: int, delta: float):
    out = np.maximum(population_uncertainty_flat(p, eps_iterlog(n, delta)), 1.0 / n)
    return float(out) if np.ndim(out) == 0 else out


def population_ci(p, n: int, delta: float):
    """Band ``[p - U(1-p), p + U(p)]`` that an empirical mass should fall in."""
    p = np.asarray(p, dtype=float)
    lo = p - population_uncertainty(1.0 - p, n, delta)
    hi = p + population_uncertainty(p, n, delta)
    return lo, hi


def empirical_ci(q, n: int, delta: float):
    q = np.asarray(q, dtype=float)
    return q - empirical_uncertainty(1.0 - q, n, delta), q + empirical_uncertainty(q, n, delta)


# ---------------------------------------------------------------------------
# intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]``.

    Emptiness is carried by the ``empty`` flag; ``lo > hi`` is rejected.
    """

    lo: float
    hi: float
    empty: bool = False

    def __post_init__(self):
        if self.empty:
            return
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise DomainError(f"invalid interval [{self.lo}, {self.hi}]")

    @classmethod
    def universal(cls) -> "Interval":
        return cls(-math.inf, math.inf)

    @classmethod
    def empty_set(cls) -> "Interval":
        return cls(math.nan, math.nan, empty=True)

    @property
    def midpoint(self) -> float:
        if self.empty:
            raise DomainError("empty interval has no midpoint")
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        if self.empty:
            return 0.0
        return self.hi - self.lo

    def __contains__(self, value) -> bool:
        return (not self.empty) and self.lo <= value <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        if other.empty:
            return True
        return (not self.empty) and self.lo <= other.lo and other.hi <= self.hi


def intersect(a: Interval, b: Interval) -> Interval:
    if a.empty or b.empty:
        return Interval.empty_set()
    lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
    if lo > hi:
        return Interval.empty_set()
    return Interval(lo, hi)


def intersect_all(intervals) -> Interval:
    """Fold :func:`intersect`; an empty family gives the universal interval."""
    out = Interval.universal()
    for iv in intervals:
        out = intersect(out, iv)
    return out


# ---------------------------------------------------------------------------
# ball counts and the eta band
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BallCounts:
    count0: int
    count1: int
    n0: int
    n1: int

    def __post_init__(self):
        if self.n0 < 1 or self.n1 < 1:
            raise DomainError("sample sizes must be positive")
        if not (0 <= self.count0 <= self.n0 and 0 <= self.count1 <= self.n1):
            raise DomainError("ball counts must lie within [0, n_y]")

    def count(self, y: int) -> int:
        return self.count1 if y else self.count0

    def n(self, y: int) -> int:
        return self.n1 if y else self.n0

    def mass(self, y: int) -> float:
        return self.count(y) / self.n(y)


def _bound_from_mass(mass, n, sign, delta):
    if sign == -1:
        return mass - empirical_uncertainty(1.0 - mass, n, delta)
    if sign == 1:
        return mass + empirical_uncertainty(mass, n, delta)
    raise DomainError(f"sign must be -1 or +1, got {sign!r}")


def class_cond_bounds(counts: BallCounts, y: int, sign: int, delta: float) -> float:
    """Lower (``sign=-1``) or upper (``sign=+1``) band for ``P_y(ball)``.

    Deliberately not clamped to [0, 1].
    """
    return float(_bound_from_mass(counts.mass(y), counts.n(y), sign, delta))


@lru_cache(maxsize=64)
def _bound_table(n: int, delta: float):
    """Lower and upper class-conditional bounds for every count ``0..n``."""
    mass = np.arange(n + 1, dtype=float) / n
    lo = _bound_from_mass(mass, n, -1, delta)
    hi = _bound_from_mass(mass, n, 1, delta)
    lo.setflags(write=False)
    hi.setflags(write=False)
    return lo, hi


def _eta_side(p1, p0, sign):
    denom = p0 + p1
    pos = denom > 0
    safe = np.where(pos, denom, 1.0)
    ratio = np.clip(p1 / safe, 0.0, 1.0)
    return np.where(pos, ratio, (sign + 1) / 2)


def eta_bounds_arrays(count0, count1, n0: int, n1: int, delta: float):
    """Vectorised eta band over arrays of ball counts.

    Returns ``(eta_lo, eta_hi, mid, width, lo, hi)`` where ``[lo, hi]`` is the
    doubled interval ``[mid - width, mid + width]`` used by the radius rule.
    """
    c0 = np.asarray(count0)
    c1 = np.asarray(count1)
    if np.issubdtype(c0.dtype, np.integer) and np.issubdtype(c1.dtype, np.integer):
        # bounds depend on the count alone; look them up
        lo0, hi0 = _bound_table(n0, delta)
        lo1, hi1 = _bound_table(n1, delta)
        p0_lo, p0_hi, p1_lo, p1_hi = lo0[c0], hi0[c0], lo1[c1], hi1[c1]
    else:
        m0 = c0.astype(float) / n0
        m1 = c1.astype(float) / n1
        p0_lo = _bound_from_mass(m0, n0, -1, delta)
        p0_hi = _bound_from_mass(m0, n0, 1, delta)
        p1_lo = _bound_from_mass(m1, n1, -1, delta)
        p1_hi = _bound_from_mass(m1, n1, 1, delta)
    eta_hi = _eta_side(p1_hi, p0_lo, 1)
    eta_lo = _eta_side(p1_lo, p0_hi, -1)
    mid = 0.5 * (eta_lo + eta_hi)
    width = eta_hi - eta_lo
    return eta_lo, eta_hi, mid, width, mid - width, mid + width


@dataclass(frozen=True)
class EtaBand:
    eta_lo: float
    eta_hi: float
    mid: float
    width: float
    interval: Interval


def eta_bounds(counts: BallCounts, delta: float) -> EtaBand:
    lo_, hi_, mid, width, lo, hi = eta_bounds_arrays(
        counts.count0, counts.count1, counts.n0, counts.n1, delta)
    return EtaBand(float(lo_), float(hi_), float(mid), float(width), Interval(float(lo), float(hi)))
