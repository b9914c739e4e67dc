"""Shared types: metric spaces, labelled/unlabelled samples, rate notation, seeding."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


# ---------------------------------------------------------------------------
# rate notation
# ---------------------------------------------------------------------------

def log_bar(z: float) -> float:
    """Truncated natural logarithm ``max(1, ln z)``.

    Equal to ``ln z`` above ``e`` and to 1 everywhere on ``(0, e]``.
    """
    if not z > 0:
        raise DomainError(f"log_bar requires z > 0, got {z!r}")
    if z > math.e:
        return math.log(z)
    return 1.0


def _check_rate_args(n, dtil):
    if int(n) != n or n < 1:
        raise DomainError(f"sample size must be a positive integer, got {n!r}")
    if not 0 < dtil < 1:
        raise DomainError(f"confidence level must lie in (0, 1), got {dtil!r}")


def eps_base(n: int, dtil: float) -> float:
    _check_rate_args(n, dtil)
    return log_bar(1.0 / dtil) / n


def eps_log(n: int, delta: float) -> float:
    """``eps_base(n, delta / n)``."""
    _check_rate_args(n, delta)
    return eps_base(n, delta / n)


def eps_iterlog(n: int, delta: float) -> float:
    """``eps_base(n, delta / log_bar(n))``; the rate used by the confidence bands."""
    _check_rate_args(n, delta)
    return eps_base(n, delta / log_bar(n))


@dataclass(frozen=True)
class RateParams:
    n: int
    delta: float

    def __post_init__(self):
        _check_rate_args(self.n, self.delta)

    @property
    def base(self) -> float:
        return eps_base(self.n, self.delta)

    @property
    def log(self) -> float:
        return eps_log(self.n, self.delta)

    @property
    def iterlog(self) -> float:
        return eps_iterlog(self.n, self.delta)


# ---------------------------------------------------------------------------
# metric spaces
# ---------------------------------------------------------------------------

class MetricSpaceKind(str, Enum):
    EUCLIDEAN_1D = "euclidean-1d"
    EUCLIDEAN_ND = "euclidean-nd"
    DISCRETE = "discrete-with-distance-table"


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """A metric space on which samples live.

    Points are floats (``euclidean-1d``), length-``dim`` vectors
    (``euclidean-nd``) or integer symbol indices into ``table``
    (``discrete-with-distance-table``).
    """

    kind: MetricSpaceKind
    dim: int = 1
    table: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", MetricSpaceKind(self.kind))
        if self.kind is MetricSpaceKind.DISCRETE:
            if self.table is None:
                raise DomainError("discrete space needs a distance table")
            tab = np.asarray(self.table, dtype=float)
            if tab.ndim != 2 or tab.shape[0] != tab.shape[1]:
                raise DomainError("distance table must be square")
            if not np.all(np.isfinite(tab)) or np.any(tab < 0):
                raise DomainError("distances must be finite and nonnegative")
            if not np.array_equal(tab, tab.T):
                raise DomainError("distance table must be symmetric")
            off = ~np.eye(len(tab), dtype=bool)
            if np.any(np.diag(tab) != 0) or np.any(tab[off] == 0):
                raise DomainError("distance table must vanish exactly on the diagonal")
            tab.setflags(write=False)
            object.__setattr__(self, "table", tab)
        elif self.kind is MetricSpaceKind.EUCLIDEAN_1D:
            object.__setattr__(self, "dim", 1)
        elif self.dim < 1:
            raise DomainError("dimension must be >= 1")

    @classmethod
    def line(cls) -> "MetricSpace":
        return cls(MetricSpaceKind.EUCLIDEAN_1D)

    @classmethod
    def euclidean(cls, dim: int) -> "MetricSpace":
        if dim == 1:
            return cls.line()
        return cls(MetricSpaceKind.EUCLIDEAN_ND, dim=dim)

    @classmethod
    def discrete(cls, table) -> "MetricSpace":
        return cls(MetricSpaceKind.DISCRETE, table=np.asarray(table, dtype=float))

    @property
    def n_symbols(self) -> int:
        if self.table is None:
            raise DomainError("only discrete spaces have symbols")
        return len(self.table)

    def as_points(self, points) -> np.ndarray:
        """Validate ``points`` and return them as an array of points."""
        if self.kind is MetricSpaceKind.DISCRETE:
            arr = np.asarray(points)
            if arr.size and (not np.issubdtype(arr.dtype, np.integer)):
                if not np.all(arr == np.round(arr)):
                    raise DomainError("discrete points must be integer symbol indices")
                arr = arr.astype(np.int64)
            arr = arr.astype(np.int64, copy=False)
            if arr.size and (arr.min() < 0 or arr.max() >= self.n_symbols):
                raise DomainError("symbol index outside the declared alphabet")
            return arr.reshape(-1)
        arr = np.asarray(points, dtype=float)
        if self.kind is MetricSpaceKind.EUCLIDEAN_1D:
            if arr.ndim == 2 and arr.shape[1] == 1:
                arr = arr[:, 0]
            if arr.ndim > 1:
                raise DomainError("1-D points must be scalars")
            arr = arr.reshape(-1)
        else:
            arr = np.atleast_2d(arr)
            if arr.shape[-1] != self.dim:
                raise DomainError(f"expected {self.dim}-dimensional points, got {arr.shape[-1]}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("point coordinates must be finite")
        return arr

    def distances(self, x, points) -> np.ndarray:
        """Distances from a single point ``x`` to each entry of ``points``."""
        pts = self.as_points(points)
        if self.kind is MetricSpaceKind.DISCRETE:
            (xi,) = self.as_points([x])
            return self.table[xi, pts]
        if self.kind is MetricSpaceKind.EUCLIDEAN_1D:
            (xv,) = self.as_points([x])
            return np.abs(pts - xv)
        xv = self.as_points([x])[0]
        return np.sqrt(np.sum((pts - xv) ** 2, axis=1))

    def pairwise(self, xs, points) -> np.ndarray:
        """Distance matrix of shape ``(len(xs), len(points))``."""
        xs = self.as_points(xs)
        pts = self.as_points(points)
        if self.kind is MetricSpaceKind.DISCRETE:
            return self.table[np.ix_(xs, pts)]
        if self.kind is MetricSpaceKind.EUCLIDEAN_1D:
            return np.abs(xs[:, None] - pts[None, :])
        diff = xs[:, None, :] - pts[None, :, :]
        return np.sqrt(np.sum(diff**2, axis=-1))


def distance(a, b, space: MetricSpace) -> float:
    return float(space.pairwise([a], [b])[0, 0])


# ---------------------------------------------------------------------------
# samples
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LabeledPool:
    """Class-conditional samples of sizes ``2*n0`` and ``2*n1``.

    The first half of each sample feeds the density-ratio estimate, the
    second half the class-conditional means.  Use :meth:`first_half` and
    :meth:`second_half` rather than slicing by hand.
    """

    class0: np.ndarray
    class1: np.ndarray

    def __post_init__(self):
        for name in ("class0", "class1"):
            arr = np.array(getattr(self, name))
            if len(arr) == 0 or len(arr) % 2:
                raise DomainError(f"{name} must have positive even length, got {len(arr)}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n0(self) -> int:
        return len(self.class0) // 2

    @property
    def n1(self) -> int:
        return len(self.class1) // 2

    def n(self, y: int) -> int:
        return self.n1 if y else self.n0

    def sample(self, y: int) -> np.ndarray:
        if y not in (0, 1):
            raise DomainError(f"label must be 0 or 1, got {y!r}")
        return self.class1 if y else self.class0

    def first_half(self, y: int) -> np.ndarray:
        return self.sample(y)[: self.n(y)]

    def second_half(self, y: int) -> np.ndarray:
        return self.sample(y)[self.n(y):]

    def swapped(self) -> "LabeledPool":
        return LabeledPool(self.class1, self.class0)


@dataclass(frozen=True, eq=False)
class UnlabeledStream:
    """Time-ordered covariates ``X_0, X_1, ...``.

    ``true_labels`` is kept for the simulator; estimators receive
    :meth:`covariates_only`.
    """

    covariates: np.ndarray
    true_labels: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        cov = np.array(self.covariates)
        cov.setflags(write=False)
        object.__setattr__(self, "covariates", cov)
        if self.true_labels is not None:
            lab = np.array(self.true_labels, dtype=np.int8)
            if len(lab) != len(cov):
                raise DomainError("labels and covariates differ in length")
            if lab.size and not np.all((lab == 0) | (lab == 1)):
                raise DomainError("labels must be 0/1")
            lab.setflags(write=False)
            object.__setattr__(self, "true_labels", lab)

    def __len__(self) -> int:
        return len(self.covariates)

    def covariates_only(self) -> "UnlabeledStream":
        return UnlabeledStream(self.covariates)

    def prefix(self, t: int) -> np.ndarray:
        """Covariates strictly before time ``t``."""
        return self.covariates[:t]


# ---------------------------------------------------------------------------
# randomness
# ---------------------------------------------------------------------------

def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based generator for ``seed`` and an optional spawn path ``keys``.

    Distinct key paths give statistically independent streams, so parallel
    replications reproduce bit-for-bit whatever the scheduling.
    """
    if seed < 0 or seed >= 2**64:
        raise DomainError("seed must be a 64-bit unsigned integer")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))
