"""Invariant suite behind ``driftshift selftest``.

Each check returns ``(passed, detail)``.  Checks look up library functions
through their modules at call time so that a patched implementation is the
one being checked.
"""

from __future__ import annotations

import math
from typing import Callable, Dict, List, Tuple

import numpy as np

from . import confbands, densratio, labelprob, legendre, sim
from .core import LabeledPool, MetricSpace, make_rng

CheckResult = Tuple[bool, str]


def check_orthonormality(max_degree: int = 6, tol: float = 1e-8) -> CheckResult:
    nodes, weights = np.polynomial.legendre.leggauss(2 * max_degree + 4)
    z, w = 0.5 * (nodes + 1.0), 0.5 * weights
    vals = np.array([legendre.shifted_legendre(k, z) for k in range(max_degree + 1)])
    gram = (vals * w) @ vals.T
    err = float(np.max(np.abs(gram - np.eye(max_degree + 1))))
    return err <= tol, f"max |<phi_j, phi_k> - [j=k]| = {err:.3g}"


def check_magnitude_bounds(max_degree: int = 6, grid: int = 10_000) -> CheckResult:
    z = np.linspace(0.0, 1.0, grid)
    worst_val = worst_der = -np.inf
    for k in range(max_degree + 1):
        val = np.max(np.abs(legendre.shifted_legendre(k, z))) / math.sqrt(2 * k + 1)
        worst_val = max(worst_val, val)
        if k:
            der = np.max(np.abs(legendre.shifted_legendre_derivative(k, z)))
            worst_der = max(worst_der, der / (2 * k * k * math.sqrt(2 * k + 1)))
    ok = worst_val <= 1 + 1e-12 and worst_der <= 1 + 1e-12
    return ok, f"value ratio {worst_val:.6f}, derivative ratio {worst_der:.6f}"


def check_gram_eigenvalues(max_p: int = 3, qs=(50, 200, 1000)) -> CheckResult:
    worst = 0.0
    for p in range(max_p + 1):
        bound = 2 * p * p * (p + 1) * (2 * p + 1)
        for q in qs:
            u = legendre.design_matrix(q, p).entries
            dev = float(np.max(np.abs(np.linalg.eigvalsh(u.T @ u) - q)))
            worst = max(worst, dev / bound if bound else (0.0 if dev <= 1e-9 * q else np.inf))
    return worst <= 1.0, f"max deviation / bound = {worst:.4f}"


def check_weight_norms(beta_bars=(1, 2, 3), span: int = 300) -> CheckResult:
    worst = 0.0
    for bb in beta_bars:
        lo = labelprob.q_min(bb)
        for q in list(range(lo, lo + span)) + [2 * lo, 5 * lo, 20 * lo]:
            w = legendre.extrapolation_weights(q, bb)
            if w.p != bb - 1:
                return False, f"p({q}) = {w.p} for beta_bar={bb}"
            worst = max(worst, w.norm2 / (bb * math.sqrt(2.0 / q)))
    return worst <= 1.0, f"max ||v|| / (beta_bar sqrt(2/q)) = {worst:.4f}"


def check_clamped_ratio(trials: int = 100_000, seed: int = 11) -> CheckResult:
    rng = make_rng(seed, 1)
    b = rng.uniform(0.05, 2.0, trials) * rng.choice([-1.0, 1.0], trials)
    a = rng.uniform(0.0, 1.0, trials) * b
    a_hat = a + rng.normal(0.0, 0.3, trials)
    b_hat = b + rng.normal(0.0, 0.3, trials)
    b_hat = np.where(b_hat == 0.0, 1e-3, b_hat)
    target = a / b
    raw = np.abs(a_hat / b_hat - target) - (np.abs(a_hat - a) + np.abs(a_hat / b_hat) * np.abs(b_hat - b)) / np.abs(b)
    clamped = np.abs(np.clip(a_hat / b_hat, 0, 1) - target) - (np.abs(a_hat - a) + np.abs(b_hat - b)) / np.abs(b)
    scale = 1.0 + np.abs(a_hat / b_hat) + 1.0 / np.abs(b)
    worst = float(max((raw / scale).max(), (clamped / scale).max()))
    return worst <= 1e-12, f"max violation {worst:.3g} over {trials} tuples"


def check_polynomial_reproduction(cases=((2, 2), (10, 2), (40, 3), (288, 2), (300, 3)),
                                  n_poly: int = 100, tol: float = 1e-9, seed: int = 12) -> CheckResult:
    rng = make_rng(seed, 2)
    worst = 0.0
    for q, bb in cases:
        w = legendre.extrapolation_weights(q, bb)
        z = np.arange(1, q + 1) / q
        for _ in range(n_poly):
            coef = rng.normal(size=w.p + 1)
            worst = max(worst, abs(float(w.v @ np.polyval(coef, z)) - coef[-1]))
    return worst <= tol, f"max |sum v_i h(i/q) - h(0)| = {worst:.3g}"


def check_two_point_weights() -> CheckResult:
    v = legendre.extrapolation_weights(2, 2).v
    err = float(np.max(np.abs(v - np.array([2.0, -1.0]))))
    return err <= 1e-12, f"v(q=2, beta_bar=2) = {v.tolist()}"


def check_window_table(seed: int = 13) -> CheckResult:
    rng = make_rng(seed, 3)
    vals = rng.random(700)
    worst = 0.0
    for bb in (1, 2, 3):
        sel = labelprob.lepski_window(vals, 700, 0.05, bb)
        for q in sel.qs[:: max(1, len(sel.qs) // 25)]:
            direct = labelprob.marginal_estimate(vals, 700, int(q), bb)
            worst = max(worst, abs(direct - sel.estimate_for(int(q))))
    return worst <= 1e-10, f"max |table - direct| = {worst:.3g}"


def _discrete_scenario(seed: int):
    rng = make_rng(seed, 4)
    k = 4
    table = np.abs(np.subtract.outer(np.arange(k), np.arange(k))).astype(float)
    p0, p1 = rng.dirichlet(np.ones(k)), rng.dirichlet(np.ones(k))
    p0[-1] = 1.0 - p0[:-1].sum()
    p1[-1] = 1.0 - p1[:-1].sum()
    spec = sim.ScenarioSpec(MetricSpace.discrete(table), sim.DiscretePMF(tuple(p0)),
                            sim.DiscretePMF(tuple(p1)), sim.TrajectorySpec("constant", {"pi": 0.3}),
                            4, 4, 10, seed)
    return spec, rng


def check_error_identity(n_rules: int = 200, seed: int = 14) -> CheckResult:
    spec, rng = _discrete_scenario(seed)
    k = spec.space.n_symbols
    p0, p1 = spec.class_cond0.p, spec.class_cond1.p
    worst = 0.0
    for _ in range(n_rules):
        labels = rng.integers(0, 2, k)
        pi = float(rng.random())
        rule = lambda s, lab=labels: lab[np.asarray(s, int)]
        brute = sum(pi * p1[x] * (labels[x] == 0) + (1 - pi) * p0[x] * (labels[x] == 1)
                    for x in range(k))
        worst = max(worst, abs(sim.test_error_pi(spec, pi, rule) - brute),
                    abs(sim.error_identity(spec, pi, rule) - brute))
    return worst <= 1e-12, f"max deviation from enumeration {worst:.3g}"


def check_bayes_dominance(n_rules: int = 100, seed: int = 15) -> CheckResult:
    spec, rng = _discrete_scenario(seed)
    k = spec.space.n_symbols
    slack = np.inf
    for _ in range(n_rules):
        pi = float(rng.random())
        labels = rng.integers(0, 2, k)
        bayes = sim.test_error_pi(spec, pi, sim.bayes_rule_pi(spec, pi))
        other = sim.test_error_pi(spec, pi, lambda s, lab=labels: lab[np.asarray(s, int)])
        slack = min(slack, other - bayes)
    return slack >= -1e-12, f"min(other - bayes) = {slack:.3g}"


def check_regret_resummation(seed: int = 16) -> CheckResult:
    rng = make_rng(seed, 5)
    excess = rng.random(1000) * 0.1
    times = np.arange(1, 1001)
    got = sim.dynamic_regret(times, excess, (200, 700))
    ref = math.fsum(excess[199:700]) / 501
    return abs(got - ref) <= 1e-15, f"|regret - fsum| = {abs(got - ref):.3g}"


def check_ci_containment(settings: int = 200, per_setting: int = 1000, seed: int = 17) -> CheckResult:
    """A mass inside the population band lies inside the band built from itself."""
    rng = make_rng(seed, 6)
    worst, count = -np.inf, 0
    while count < settings:
        n, delta = int(rng.integers(3, 5000)), float(rng.uniform(0.001, 0.99))
        if math.log(n) < math.e * delta:
            continue
        count += 1
        p = rng.random(per_setting)
        q = np.clip(p + rng.random(per_setting) * confbands.population_uncertainty(p, n, delta), 0, 1)
        viol = (q - p) - confbands.empirical_uncertainty(1.0 - q, n, delta)
        worst = max(worst, float(viol.max()))
    return worst <= 1e-12, f"max violation {worst:.3g} over {settings * per_setting} draws"


def check_batch_eta(seed: int = 18) -> CheckResult:
    rng = make_rng(seed, 7)
    pool = LabeledPool(rng.normal(-1, 1, 200), rng.normal(1, 1, 200))
    xs = np.linspace(-3, 3, 25)
    vals, radii = densratio.eta_hat_many(xs, pool, MetricSpace.line(), 0.05)
    single = [densratio.eta_hat(x, pool, MetricSpace.line(), 0.05) for x in xs]
    ok = all(s.value == v and s.chosen_radius == r for s, v, r in zip(single, vals, radii))
    return ok, "batch and single-point estimates agree" if ok else "batch estimate differs"


def check_tv_routes() -> CheckResult:
    spec = sim.preset("slow-sine", n0=10, T=10)
    a, b = sim.tv_oracle(spec), sim.tv_by_cdf(spec)
    return abs(a - b) <= 1e-8, f"quadrature {a:.12f} vs cdf {b:.12f}"


CHECKS: Dict[str, Callable[[], CheckResult]] = {
    "orthonormality": check_orthonormality,
    "legendre-magnitude": check_magnitude_bounds,
    "gram-eigenvalues": check_gram_eigenvalues,
    "weight-norm": check_weight_norms,
    "clamped-ratio": check_clamped_ratio,
    "polynomial-reproduction": check_polynomial_reproduction,
    "two-point-weights": check_two_point_weights,
    "window-table": check_window_table,
    "error-identity": check_error_identity,
    "bayes-dominance": check_bayes_dominance,
    "regret-resummation": check_regret_resummation,
    "ci-containment": check_ci_containment,
    "batch-eta": check_batch_eta,
    "tv-routes": check_tv_routes,
}


def run_all() -> List[Tuple[str, bool, str]]:
    out = []
    for name, fn in CHECKS.items():
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out


def format_table(results) -> str:
    width = max(len(name) for name, _, _ in results)
    lines = [f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}" for name, ok, detail in results]
    return "\n".join(lines)
