"""Label-shift scenarios with exact oracles.

A :class:`ScenarioSpec` fixes two class-conditional distributions, a path of
label probabilities ``pi_0..pi_T`` and the sample sizes.  Test errors of
decision rules are computed exactly: by enumeration on discrete spaces and
through CDF differences between located switch points on the line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize, special

from .core import (DomainError, LabeledPool, MetricSpace, MetricSpaceKind, UnlabeledStream,
                   eps_base, eps_iterlog, eps_log, make_rng)

SUPPORT_SDS = 8.0
SWITCH_GRID = 4001
BISECT_TOL = 1e-12


# ---------------------------------------------------------------------------
# class-conditional distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianMixture:
    weights: Tuple[float, ...]
    means: Tuple[float, ...]
    sds: Tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, float)
        if not (len(self.weights) == len(self.means) == len(self.sds) >= 1):
            raise DomainError("mixture weights, means and sds must have equal nonzero length")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise DomainError("mixture weights must be nonnegative and sum to 1")
        if any(s <= 0 for s in self.sds):
            raise DomainError("mixture sds must be positive")

    @classmethod
    def normal(cls, mean: float, sd: float = 1.0) -> "GaussianMixture":
        return cls((1.0,), (float(mean),), (float(sd),))

    def _parts(self):
        return (np.asarray(self.weights, float), np.asarray(self.means, float),
                np.asarray(self.sds, float))

    def pdf(self, x):
        w, m, s = self._parts()
        x = np.asarray(x, float)[..., None]
        dens = np.exp(-0.5 * ((x - m) / s) ** 2) / (s * math.sqrt(2 * math.pi))
        return (dens * w).sum(-1)

    def cdf(self, x):
        w, m, s = self._parts()
        x = np.asarray(x, float)[..., None]
        return (special.ndtr((x - m) / s) * w).sum(-1)

    def mass(self, a, b):
        """``P([a, b])`` (or the open interval; there are no atoms)."""
        return self.cdf(b) - self.cdf(a)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        w, m, s = self._parts()
        comp = rng.choice(len(w), size=size, p=w)
        return m[comp] + s[comp] * rng.standard_normal(size)

    def support(self) -> Tuple[float, float]:
        _, m, s = self._parts()
        return float(np.min(m - SUPPORT_SDS * s)), float(np.max(m + SUPPORT_SDS * s))

    def to_dict(self):
        return {"type": "gaussian-mixture", "weights": list(self.weights),
                "means": list(self.means), "sds": list(self.sds)}


@dataclass(frozen=True)
class DiscretePMF:
    probs: Tuple[float, ...]

    def __post_init__(self):
        p = np.asarray(self.probs, float)
        if p.ndim != 1 or len(p) == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise DomainError("pmf must be nonnegative and sum to 1 within 1e-12")

    @property
    def p(self) -> np.ndarray:
        return np.asarray(self.probs, float)

    def pdf(self, x):
        return self.p[np.asarray(x, dtype=np.int64)]

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(len(self.probs), size=size, p=self.p).astype(np.int64)

    def to_dict(self):
        return {"type": "pmf", "probs": list(self.probs)}


def distribution_from_dict(d):
    kind = d.get("type")
    if kind == "gaussian-mixture":
        return GaussianMixture(tuple(map(float, d["weights"])), tuple(map(float, d["means"])),
                               tuple(map(float, d["sds"])))
    if kind == "normal":
        return GaussianMixture.normal(float(d["mean"]), float(d.get("sd", 1.0)))
    if kind == "pmf":
        return DiscretePMF(tuple(map(float, d["probs"])))
    raise DomainError(f"unknown distribution type {kind!r}")


# ---------------------------------------------------------------------------
# label-probability trajectories
# ---------------------------------------------------------------------------

def sine_holder_constant(amplitude: float, cycles: float, beta: float) -> float:
    """Hoelder constant of ``u -> A sin(2 pi k u + phase)`` on [0, 1] for exponent ``beta``.

    Interpolates between the Lipschitz bound and the range bound of the
    relevant derivative.
    """
    a, omega = abs(amplitude), 2 * math.pi * cycles
    if beta == 0:
        return 2 * a
    if beta <= 1:
        return (a * omega) ** beta * (2 * a) ** (1 - beta)
    if beta <= 2:
        return (a * omega**2) ** (beta - 1) * (2 * a * omega) ** (2 - beta)
    raise DomainError("sine shapes are certified for beta <= 2 only")


def holder_certificate(g: Callable, beta: float, constant: float, grid: int = 2001,
                       slack: float = 1e-6) -> bool:
    """Finite-difference check that ``g`` lies in the Hoelder class ``(beta, constant)``.

    For ``beta > 1`` the derivative is taken by central differences.
    """
    u = np.linspace(0.0, 1.0, grid)
    order = max(math.ceil(beta) - 1, 0)
    vals = g(u)
    if order == 1:
        h = 1e-5
        uu = np.clip(u, h, 1 - h)
        vals = (g(uu + h) - g(uu - h)) / (2 * h)
    elif order > 1:
        raise DomainError("certificate supports beta <= 2")
    if beta == 0:
        return float(vals.max() - vals.min()) <= constant * (1 + slack) + slack
    expo = beta - order
    coarse = np.linspace(0, grid - 1, 201).astype(int)
    i, j = np.triu_indices(len(coarse), 1)
    pairs = [(coarse[i], coarse[j]), (np.arange(grid - 1), np.arange(1, grid))]
    for a, b in pairs:
        ratio = np.abs(vals[a] - vals[b]) / np.abs(u[a] - u[b]) ** expo
        if ratio.max() > constant * (1 + slack) + slack:
            return False
    return True


@dataclass(frozen=True)
class TrajectorySpec:
    """Label-probability path ``pi_0..pi_T``.

    kinds and their params:

    * ``constant``: ``pi``
    * ``holder``: ``beta``, ``C`` (optional, certified), ``shape`` (``"sine"``),
      ``center``, ``amplitude``, ``cycles``, ``phase``
    * ``piecewise-jumps``: ``levels`` (one per segment), ``breaks`` (fractions)
    * ``tv-budget``: ``V``, ``beta_v``, ``moves``, ``start``, ``lo``, ``hi``
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("constant", "holder", "piecewise-jumps", "tv-budget"):
            raise DomainError(f"unknown trajectory kind {self.kind!r}")

    def to_dict(self):
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        return cls(d.pop("kind"), d)

    # holder ------------------------------------------------------------
    def sine(self) -> Callable:
        p = self.params
        c, a = float(p.get("center", 0.5)), float(p.get("amplitude", 0.3))
        k, ph = float(p.get("cycles", 1.0)), float(p.get("phase", 0.0))
        return lambda u: c + a * np.sin(2 * math.pi * k * np.asarray(u, float) + ph)

    def holder_constant(self) -> float:
        p = self.params
        return sine_holder_constant(float(p.get("amplitude", 0.3)), float(p.get("cycles", 1.0)),
                                    float(p["beta"]))

    def certify(self) -> bool:
        if self.kind == "holder":
            declared = self.params.get("C")
            const = self.holder_constant() if declared is None else float(declared)
            return holder_certificate(self.sine(), float(self.params["beta"]), const)
        return True

    # paths -------------------------------------------------------------
    def path(self, T: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        ell = np.arange(T + 1)
        p = self.params
        if self.kind == "constant":
            pis = np.full(T + 1, float(p["pi"]))
        elif self.kind == "holder":
            if p.get("shape", "sine") != "sine":
                raise DomainError(f"unknown holder shape {p.get('shape')!r}")
            pis = self.sine()(ell / T)
        elif self.kind == "piecewise-jumps":
            pis = _piecewise(T, p["levels"], p.get("breaks"))
        else:
            pis = _tv_walk(T, p, rng if rng is not None else make_rng(0))
        if np.any(pis < 0) or np.any(pis > 1):
            raise DomainError("label probabilities must lie in [0, 1]")
        return pis

    def segments(self, T: int):
        """``(start, stop)`` index pairs of the piecewise segments."""
        bounds = _segment_bounds(T, len(self.params["levels"]), self.params.get("breaks"))
        return list(zip(bounds[:-1], bounds[1:]))


def _segment_bounds(T, J, breaks):
    if breaks is None:
        breaks = [j / J for j in range(1, J)]
    if len(breaks) != J - 1:
        raise DomainError("need J-1 breaks for J segments")
    cuts = [0] + [int(round(b * (T + 1))) for b in breaks] + [T + 1]
    if any(b <= a for a, b in zip(cuts[:-1], cuts[1:])):
        raise DomainError("segments must be nonempty and increasing")
    return cuts


def _piecewise(T, levels, breaks):
    cuts = _segment_bounds(T, len(levels), breaks)
    pis = np.empty(T + 1)
    for lvl, a, b in zip(levels, cuts[:-1], cuts[1:]):
        pis[a:b] = float(lvl)
    return pis


def _tv_walk(T, p, rng):
    """Lazy walk whose path variation ``(sum |step|^(1/beta_v))^beta_v`` is exactly ``V``."""
    V, beta_v = float(p["V"]), float(p.get("beta_v", 1.0))
    moves = int(p.get("moves", max(1, T // 20)))
    lo, hi = float(p.get("lo", 0.1)), float(p.get("hi", 0.9))
    start = float(p.get("start", 0.5 * (lo + hi)))
    if not 1 <= moves <= T:
        raise DomainError("tv-walk needs 1 <= moves <= T")
    step = V / moves**beta_v
    if step > hi - lo:
        raise DomainError("tv-walk step exceeds the allowed band; raise 'moves'")
    when = np.sort(rng.choice(np.arange(1, T + 1), size=moves, replace=False))
    signs = rng.choice([-1.0, 1.0], size=moves)
    incr = np.zeros(T + 1)
    level = start
    for w, s in zip(when, signs):
        if not lo <= level + s * step <= hi:
            s = -s
        level += s * step
        incr[w] = s * step
    return start + np.cumsum(incr)


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    space: MetricSpace
    class_cond0: object
    class_cond1: object
    trajectory: TrajectorySpec
    n0: int
    n1: int
    T: int
    seed: int = 0
    name: str = "custom"

    def __post_init__(self):
        if self.n0 < 1 or self.n1 < 1 or self.T < 1:
            raise DomainError("n0, n1 and T must be positive")
        discrete = self.space.kind is MetricSpaceKind.DISCRETE
        for d in (self.class_cond0, self.class_cond1):
            if discrete and not isinstance(d, DiscretePMF):
                raise DomainError("discrete spaces need pmf class conditionals")
            if not discrete and not isinstance(d, GaussianMixture):
                raise DomainError("1-D scenarios need Gaussian-mixture class conditionals")
            if discrete and len(d.probs) != self.space.n_symbols:
                raise DomainError("pmf length must match the alphabet size")
        if not discrete and self.space.kind is not MetricSpaceKind.EUCLIDEAN_1D:
            raise DomainError("the simulator supports euclidean-1d and discrete spaces")

    @property
    def discrete(self) -> bool:
        return self.space.kind is MetricSpaceKind.DISCRETE

    def cond(self, y: int):
        return self.class_cond1 if y else self.class_cond0

    @cached_property
    def pis(self) -> np.ndarray:
        path = self.trajectory.path(self.T, make_rng(self.seed, 2))
        path.setflags(write=False)
        return path

    def with_(self, **changes) -> "ScenarioSpec":
        return replace(self, **changes)

    def to_dict(self):
        d = {"name": self.name, "class_cond0": self.class_cond0.to_dict(),
             "class_cond1": self.class_cond1.to_dict(), "trajectory": self.trajectory.to_dict(),
             "n0": self.n0, "n1": self.n1, "T": self.T, "seed": self.seed}
        if self.discrete:
            d["space"] = {"kind": self.space.kind.value, "table": self.space.table.tolist()}
        else:
            d["space"] = {"kind": self.space.kind.value}
        return d

    @classmethod
    def from_dict(cls, d):
        sp = d.get("space", {"kind": "euclidean-1d"})
        kind = MetricSpaceKind(sp["kind"])
        space = MetricSpace.discrete(sp["table"]) if kind is MetricSpaceKind.DISCRETE else MetricSpace.line()
        return cls(space, distribution_from_dict(d["class_cond0"]),
                   distribution_from_dict(d["class_cond1"]), TrajectorySpec.from_dict(d["trajectory"]),
                   int(d["n0"]), int(d["n1"]), int(d["T"]), int(d.get("seed", 0)),
                   d.get("name", "custom"))


PRESETS = ("stationary", "slow-sine", "J-jumps", "tv-walk")


def preset(name: str, n0: int = 2000, n1: Optional[int] = None, T: int = 2000, seed: int = 0,
           **trajectory_overrides) -> ScenarioSpec:
    """Named scenarios on N(-1, 1) vs N(1, 1), whose total variation is about 0.683."""
    n1 = n0 if n1 is None else n1
    if name == "stationary":
        traj = TrajectorySpec("constant", {"pi": 0.5})
    elif name == "slow-sine":
        traj = TrajectorySpec("holder", {"beta": 1.0, "shape": "sine", "center": 0.5,
                                         "amplitude": 0.3, "cycles": 1.0, "phase": 0.0})
    elif name == "J-jumps":
        traj = TrajectorySpec("piecewise-jumps", {"levels": [0.2, 0.8, 0.35, 0.65]})
    elif name == "tv-walk":
        traj = TrajectorySpec("tv-budget", {"V": 2.0, "beta_v": 1.0, "moves": 40,
                                            "lo": 0.1, "hi": 0.9})
    else:
        raise DomainError(f"unknown preset {name!r}; choose from {PRESETS}")
    if trajectory_overrides:
        traj = TrajectorySpec(traj.kind, {**traj.params, **trajectory_overrides})
    if traj.kind == "holder" and "C" not in traj.params:
        traj = TrajectorySpec(traj.kind, {**traj.params, "C": traj.holder_constant()})
    return ScenarioSpec(MetricSpace.line(), GaussianMixture.normal(-1.0), GaussianMixture.normal(1.0),
                        traj, n0, n1, T, seed, name)


@dataclass(frozen=True, eq=False)
class Scenario:
    spec: ScenarioSpec
    pool: LabeledPool
    stream: UnlabeledStream

    @property
    def pis(self) -> np.ndarray:
        return self.spec.pis


def generate(spec: ScenarioSpec) -> Scenario:
    """Draw the labelled pool and the stream ``(X_l, Y_l)``, ``l = 0..T``."""
    r_pool, r_stream = make_rng(spec.seed, 0), make_rng(spec.seed, 1)
    pool = LabeledPool(spec.class_cond0.sample(r_pool, 2 * spec.n0),
                       spec.class_cond1.sample(r_pool, 2 * spec.n1))
    pis = spec.pis
    labels = (r_stream.random(len(pis)) < pis).astype(np.int8)
    xs0 = spec.class_cond0.sample(r_stream, len(pis))
    xs1 = spec.class_cond1.sample(r_stream, len(pis))
    covs = np.where(labels == 1, xs1, xs0)
    return Scenario(spec, pool, UnlabeledStream(covs, labels))


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def eta_values(spec: ScenarioSpec, xs) -> Tuple[np.ndarray, np.ndarray]:
    """``eta = g1 / (g0 + g1)`` and a mask of joint-null points (set to 1/2)."""
    xs = spec.space.as_points(xs)
    g0, g1 = spec.class_cond0.pdf(xs), spec.class_cond1.pdf(xs)
    tot = g0 + g1
    null = tot == 0
    return np.where(null, 0.5, g1 / np.where(null, 1.0, tot)), null


def eta_oracle(spec: ScenarioSpec, x) -> float:
    vals, _ = eta_values(spec, [x])
    return float(vals[0])


def _crossings(fn, lo, hi, grid=SWITCH_GRID):
    x = np.linspace(lo, hi, grid)
    s = np.sign(fn(x))
    roots = []
    # sign changes between consecutive nonzero grid values; a run of exact
    # zeros in between is represented by its first point
    nz = np.flatnonzero(s != 0)
    for i, j in zip(nz[:-1], nz[1:]):
        if s[i] * s[j] < 0:
            roots.append(optimize.brentq(fn, x[i], x[j], xtol=1e-14) if j == i + 1 else x[i + 1])
    return [float(r) for r in roots]


def tv_by_cdf(spec: ScenarioSpec) -> float:
    """Total variation from CDF differences between the density crossings."""
    if spec.discrete:
        return float(0.5 * np.abs(spec.class_cond0.p - spec.class_cond1.p).sum())
    lo = min(spec.class_cond0.support()[0], spec.class_cond1.support()[0])
    hi = max(spec.class_cond0.support()[1], spec.class_cond1.support()[1])
    diff = lambda x: spec.class_cond1.pdf(x) - spec.class_cond0.pdf(x)
    roots = _crossings(diff, lo, hi)
    edges = [-np.inf] + roots + [np.inf]
    # on each sign-constant piece the integral is a CDF difference
    tv = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        tv += abs(spec.class_cond1.mass(a, b) - spec.class_cond0.mass(a, b))
    return float(0.5 * tv)


def tv_oracle(spec: ScenarioSpec) -> float:
    """Total variation ``(1/2) * integral |g1 - g0|`` between the class conditionals.

    Exact sum on discrete spaces, adaptive Gauss-Kronrod quadrature over the
    +-8 sd support on the line, split at the density crossings.
    """
    if spec.discrete:
        return float(0.5 * np.abs(spec.class_cond0.p - spec.class_cond1.p).sum())
    lo = min(spec.class_cond0.support()[0], spec.class_cond1.support()[0])
    hi = max(spec.class_cond0.support()[1], spec.class_cond1.support()[1])
    diff = lambda x: spec.class_cond1.pdf(x) - spec.class_cond0.pdf(x)
    roots = _crossings(diff, lo, hi)
    val, _ = integrate.quad(lambda x: abs(float(diff(x))), lo, hi, points=roots or None,
                            epsabs=1e-10, epsrel=1e-10, limit=500)
    return 0.5 * val


def _pi_at(spec: ScenarioSpec, t) -> float:
    return float(spec.pis[t])


def test_error_cells(spec: ScenarioSpec, pi: float, edges, labels) -> float:
    """Exact error of a rule that is constant on the cells ``[edges[k], edges[k+1])``."""
    edges = np.asarray(edges, float)
    labels = np.asarray(labels)
    m0 = spec.class_cond0.mass(edges[:-1], edges[1:])
    m1 = spec.class_cond1.mass(edges[:-1], edges[1:])
    return float(pi * np.sum(m1 * (labels == 0)) + (1 - pi) * np.sum(m0 * (labels == 1)))


def rule_cells(spec: ScenarioSpec, rule: Callable, grid: int = SWITCH_GRID):
    """Locate the switch points of a 1-D rule and return ``(edges, labels)``.

    Assumes at most one switch between neighbouring grid points; each switch
    is refined by bisection to ``BISECT_TOL``.
    """
    lo = min(spec.class_cond0.support()[0], spec.class_cond1.support()[0])
    hi = max(spec.class_cond0.support()[1], spec.class_cond1.support()[1])
    x = np.linspace(lo, hi, grid)
    lab = np.asarray(rule(x)).astype(int)
    switches = []
    for i in np.flatnonzero(lab[1:] != lab[:-1]):
        a, b = x[i], x[i + 1]
        la = lab[i]
        while b - a > BISECT_TOL:
            m = 0.5 * (a + b)
            if int(np.asarray(rule(np.array([m])))[0]) == la:
                a = m
            else:
                b = m
        switches.append(b)
    edges = np.array([-np.inf] + switches + [np.inf])
    labels = [lab[0]] + [lab[i + 1] for i in np.flatnonzero(lab[1:] != lab[:-1])]
    return edges, np.array(labels)


def test_error_pi(spec: ScenarioSpec, pi: float, rule: Callable) -> float:
    """``pi P1(rule = 0) + (1 - pi) P0(rule = 1)``."""
    if spec.discrete:
        syms = np.arange(spec.space.n_symbols)
        lab = np.asarray(rule(syms)).astype(int)
        return float(pi * np.sum(spec.class_cond1.p * (lab == 0))
                     + (1 - pi) * np.sum(spec.class_cond0.p * (lab == 1)))
    edges, labels = rule_cells(spec, rule)
    return test_error_cells(spec, pi, edges, labels)


def test_error(spec: ScenarioSpec, t: int, rule: Callable) -> float:
    return test_error_pi(spec, _pi_at(spec, t), rule)


def bayes_rule_pi(spec: ScenarioSpec, pi: float) -> Callable:
    def rule(xs):
        vals, _ = eta_values(spec, xs)
        return (vals > 1.0 - pi).astype(int)
    return rule


def bayes_rule(spec: ScenarioSpec, t: int) -> Callable:
    """``x -> 1{eta(x) > 1 - pi_t}``."""
    return bayes_rule_pi(spec, _pi_at(spec, t))


def bayes_error(spec: ScenarioSpec, t: int) -> float:
    return test_error(spec, t, bayes_rule(spec, t))


def bayes_errors(spec: ScenarioSpec, pis) -> np.ndarray:
    """Bayes errors for many label probabilities at once.

    Same construction as :func:`rule_cells` applied to each Bayes rule, with
    the bisections run jointly across all probabilities.
    """
    pis = np.asarray(pis, float)
    if spec.discrete:
        return np.array([test_error_pi(spec, float(p), bayes_rule_pi(spec, float(p))) for p in pis])
    lo = min(spec.class_cond0.support()[0], spec.class_cond1.support()[0])
    hi = max(spec.class_cond0.support()[1], spec.class_cond1.support()[1])
    x = np.linspace(lo, hi, SWITCH_GRID)
    eta_grid, _ = eta_values(spec, x)
    thr = 1.0 - pis
    lab = eta_grid[None, :] > thr[:, None]
    rows, idx = np.nonzero(lab[:, 1:] != lab[:, :-1])
    a, b = x[idx], x[idx + 1]
    left = lab[rows, idx]
    while len(a) and np.max(b - a) > BISECT_TOL:
        m = 0.5 * (a + b)
        same = (eta_values(spec, m)[0] > thr[rows]) == left
        a, b = np.where(same, m, a), np.where(same, b, m)
    out = np.empty(len(pis))
    for k, pi in enumerate(pis):
        sel = rows == k
        edges = np.r_[-np.inf, b[sel], np.inf]
        labels = np.r_[lab[k, 0], ~left[sel]].astype(int)
        out[k] = test_error_cells(spec, float(pi), edges, labels)
    return out


def error_identity(spec: ScenarioSpec, pi: float, rule: Callable) -> float:
    """``pi + 2 sum_x rule(x) (1 - pi - eta(x)) mu_half(x)`` on a discrete space."""
    if not spec.discrete:
        raise DomainError("the enumeration identity is for discrete scenarios")
    syms = np.arange(spec.space.n_symbols)
    lab = np.asarray(rule(syms)).astype(float)
    half = 0.5 * (spec.class_cond0.p + spec.class_cond1.p)
    eta, _ = eta_values(spec, syms)
    return float(pi + 2.0 * np.sum(lab * (1.0 - pi - eta) * half))


# ---------------------------------------------------------------------------
# regret and path variation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RegretReport:
    times: np.ndarray
    test_errors: np.ndarray
    bayes_errors: np.ndarray
    interval: Tuple[int, int]
    overlay: Optional[dict] = None

    @property
    def excess(self) -> np.ndarray:
        return self.test_errors - self.bayes_errors

    @property
    def averaged(self) -> float:
        return dynamic_regret(self.times, self.excess, self.interval)


def dynamic_regret(times: Sequence[int], excess: Sequence[float], interval: Tuple[int, int]) -> float:
    """Mean excess error over ``interval`` (inclusive on both ends)."""
    times = np.asarray(times)
    excess = np.asarray(excess, float)
    lo, hi = interval
    sel = (times >= lo) & (times <= hi)
    if sel.sum() != hi - lo + 1:
        raise DomainError(f"interval [{lo}, {hi}] is not fully covered")
    return float(np.mean(excess[sel]))


def tv_label_path(pis: Sequence[float], beta_v: float = 1.0,
                  interval: Optional[Tuple[int, int]] = None) -> float:
    """``(sum_l |pi_l - pi_{l+1}|^(1/beta_v))^beta_v`` over ``l`` in ``[lo, hi-1]``."""
    if beta_v < 1:
        raise DomainError("beta_v must be >= 1")
    pis = np.asarray(pis, float)
    lo, hi = interval if interval is not None else (0, len(pis) - 1)
    steps = np.abs(np.diff(pis[lo:hi + 1]))
    return float(np.sum(steps ** (1.0 / beta_v)) ** beta_v)


# ---------------------------------------------------------------------------
# bound overlays (shape only; every unspecified constant is 1)
# ---------------------------------------------------------------------------

def psi(r: float, q: float) -> float:
    """``{r^(q-1) (1 + int_1^r z^-q dz)}^(1/q)`` in closed form."""
    if r < 1 or q <= 0:
        raise DomainError("psi needs r >= 1 and q > 0")
    if q == 1:
        return 1.0 + math.log(r)
    return ((1.0 - q * r ** (q - 1)) / (1.0 - q)) ** (1.0 / q)


def _need_tv(tv):
    if not tv > 0:
        raise DomainError("bounds divide by the total variation; it must be positive")


def labelled_rate(n_min: int, delta: float, tv: float, spatial_exponent: float = 1.0,
                  spatial_constant: float = 0.0) -> float:
    _need_tv(tv)
    first = math.sqrt(eps_log(n_min, delta)) / tv
    a = spatial_exponent
    second = (spatial_constant ** (1 / a) * eps_iterlog(n_min, delta)) ** (a / (2 * a + 1))
    return max(first, second)


def unlabelled_rate(m: int, delta: float, tv: float, beta: float, constant: float) -> float:
    _need_tv(tv)
    first = math.sqrt(eps_log(m, delta)) / tv
    if beta == 0:
        return max(first, constant)
    second = (constant ** (1 / beta) * eps_log(m, delta) / tv**2) ** (beta / (2 * beta + 1))
    return max(first, second)


def sequential_unlabelled_rate(r: float, constant: float, *, tv: float, delta: float, t_max: int,
                               beta: float, margin_exponent: float) -> float:
    _need_tv(tv)
    eb = eps_base(max(int(math.floor(r)), 1), delta / t_max)
    first = math.sqrt(psi(r, margin_exponent / 2) * eb) / tv
    if beta == 0:
        return max(constant, first)
    second = (constant ** (1 / beta) * eb / tv**2) ** (beta / (2 * beta + 1))
    return max(first, second)


def theory_bounds(*, n_min: int, delta: float, tv: float, T: int, m: Optional[int] = None,
                  beta: float = 1.0, holder_constant: float = 0.0, jumps: int = 1,
                  path_variation: Optional[float] = None, margin_exponent: float = 1.0,
                  margin_constant: float = 1.0, spatial_exponent: float = 1.0,
                  spatial_constant: float = 0.0) -> dict:
    """Right-hand sides of the regret bounds with unit constants, for plotting."""
    lab = labelled_rate(n_min, delta, tv, spatial_exponent, spatial_constant)
    out = {"note": "shape-only reference values; unspecified constants set to 1",
           "labelled_rate": lab}
    if m is not None:
        unl = unlabelled_rate(m, delta, tv, beta, holder_constant)
        out["unlabelled_rate"] = unl
        z = max(lab, unl)
        out["single_time_rhs"] = 2 * min(1.0, margin_constant * z**margin_exponent) + delta
    seq = sequential_unlabelled_rate(T / jumps, holder_constant, tv=tv, delta=delta, t_max=T,
                                     beta=beta, margin_exponent=margin_exponent)
    out["jumps_rhs"] = margin_constant * max(lab, seq) ** margin_exponent + delta
    if path_variation is not None:
        seq_tv = sequential_unlabelled_rate(T, path_variation, tv=tv, delta=delta, t_max=T,
                                            beta=beta, margin_exponent=margin_exponent)
        out["path_variation_rhs"] = margin_constant * max(lab, seq_tv) ** margin_exponent + delta
    return out
