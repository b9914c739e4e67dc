"""Command-line experiment runner.

Config is a JSON document::

    {
      "schema_version": 1,
      "scenario": {"preset": "slow-sine"},          # or a full scenario dict
      "estimator": {"delta": 0.05, "beta_bar": 1},
      "sweep": {"n": [2000], "T": [2000], "seeds": [0, 1, 2]},
      "intervals": [[1000, 2000]],                  # optional
      "grid": {"lo": -3, "hi": 3, "points": 61},    # estimate-eta only
      "outputs": "out",
      "emit_plots": false
    }

Exit codes: 0 success, 1 selftest failure, 2 malformed config, 3 unwritable output.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import __version__, experiment, selftest, sim
from .classifier import build_state
from .core import DomainError

SCHEMA_VERSION = 1
EXIT_OK, EXIT_SELFTEST, EXIT_CONFIG, EXIT_OUTPUT = 0, 1, 2, 3


class ConfigError(Exception):
    pass


class OutputError(Exception):
    pass


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    raw: dict
    scenario: dict
    estimator: experiment.EstimatorConfig
    ns: Tuple[int, ...]
    Ts: Tuple[int, ...]
    seeds: Tuple[int, ...]
    intervals: Optional[Tuple[Tuple[int, int], ...]]
    grid: Optional[dict]
    outputs: str
    emit_plots: bool

    def spec_for(self, n: int, T: int, seed: int) -> sim.ScenarioSpec:
        sc = self.scenario
        if "preset" in sc:
            return sim.preset(sc["preset"], n0=n, n1=n, T=T, seed=seed, **sc.get("trajectory", {}))
        return sim.ScenarioSpec.from_dict({**sc, "n0": n, "n1": n, "T": T, "seed": seed})

    def intervals_for(self, T: int) -> List[Tuple[int, int]]:
        if self.intervals is None:
            return [(1, T), (math.ceil(T / 2), T)]
        return [iv for iv in self.intervals if iv[1] <= T]

    def cells(self):
        return list(itertools.product(self.ns, self.Ts, self.seeds))


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def config_hash(raw: dict) -> str:
    return hashlib.sha256(canonical_json(raw).encode("utf-8")).hexdigest()


def _need(d, key, path, kind=None):
    if key not in d:
        raise ConfigError(f"{path}.{key}: missing required field")
    val = d[key]
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(f"{path}.{key}: expected {getattr(kind, '__name__', kind)}, "
                          f"got {type(val).__name__}")
    return val


def _int_list(val, path) -> Tuple[int, ...]:
    if not isinstance(val, list) or not val:
        raise ConfigError(f"{path}: expected a nonempty list of integers")
    for i, v in enumerate(val):
        if not isinstance(v, int) or isinstance(v, bool):
            raise ConfigError(f"{path}[{i}]: expected an integer, got {v!r}")
    return tuple(val)


def parse_config(text: str, seeds_override: Optional[Sequence[int]] = None) -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    version = _need(raw, "schema_version", "config", int)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"config.schema_version: unsupported version {version}")
    scenario = _need(raw, "scenario", "config", dict)
    if "preset" in scenario and scenario["preset"] not in sim.PRESETS:
        raise ConfigError(f"config.scenario.preset: unknown preset {scenario['preset']!r}")
    est_raw = raw.get("estimator", {})
    if not isinstance(est_raw, dict):
        raise ConfigError("config.estimator: expected object")
    try:
        est = experiment.EstimatorConfig(float(est_raw.get("delta", 0.05)),
                                         int(est_raw.get("beta_bar", 1)),
                                         int(est_raw.get("cells", experiment.DEFAULT_CELLS)))
    except (DomainError, TypeError, ValueError) as exc:
        raise ConfigError(f"config.estimator: {exc}") from None
    sweep = _need(raw, "sweep", "config", dict)
    ns = _int_list(_need(sweep, "n", "config.sweep"), "config.sweep.n")
    Ts = _int_list(_need(sweep, "T", "config.sweep"), "config.sweep.T")
    if seeds_override is not None:
        raw = {**raw, "sweep": {**sweep, "seeds": list(seeds_override)}}
        sweep = raw["sweep"]
    seeds = _int_list(_need(sweep, "seeds", "config.sweep"), "config.sweep.seeds")
    if any(v < 1 for v in ns + Ts):
        raise ConfigError("config.sweep: n and T must be positive")
    intervals = raw.get("intervals")
    if intervals is not None:
        if not isinstance(intervals, list) or not all(
                isinstance(iv, list) and len(iv) == 2 and all(isinstance(x, int) for x in iv)
                and 1 <= iv[0] <= iv[1] for iv in intervals):
            raise ConfigError("config.intervals: expected a list of [lo, hi] integer pairs with 1 <= lo <= hi")
        intervals = tuple(tuple(iv) for iv in intervals)
    grid = raw.get("grid")
    if grid is not None:
        if not isinstance(grid, dict) or not {"lo", "hi", "points"} <= set(grid):
            raise ConfigError("config.grid: expected an object with lo, hi and points")
    outputs = raw.get("outputs", "out")
    if not isinstance(outputs, str):
        raise ConfigError("config.outputs: expected a path string")
    emit = raw.get("emit_plots", False)
    if not isinstance(emit, bool):
        raise ConfigError("config.emit_plots: expected true or false")
    cfg = ExperimentConfig(raw, scenario, est, ns, Ts, seeds, intervals, grid, outputs, emit)
    try:
        cfg.spec_for(ns[0], Ts[0], seeds[0]).pis
    except (DomainError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"config.scenario: {exc}") from None
    return cfg


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def csv_bytes(header: Sequence[str], rows, int_cols: Sequence[int] = ()) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([str(int(v)) if i in int_cols else fmt(v) for i, v in enumerate(row)])
    return buf.getvalue().encode("utf-8")


def prepare_out(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write-probe"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise OutputError(f"cannot write to {path}: {exc}") from None
    return path


def write_file(path: Path, data: bytes) -> None:
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from None


def write_json(path: Path, obj) -> None:
    write_file(path, (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode("utf-8"))


def resolve_jobs(jobs: Optional[int]) -> int:
    if jobs is None:
        env = os.environ.get("DRIFTSHIFT_JOBS")
        jobs = int(env) if env else 1
    return max(1, jobs)


def parallel_map(fn, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


# ---------------------------------------------------------------------------
# workers (module level so they pickle)
# ---------------------------------------------------------------------------

def _regret_task(args):
    cfg, n, T, seed = args
    res = experiment.run_replication(cfg.spec_for(n, T, seed), cfg.estimator)
    return res.rows


def _pi_task(args):
    cfg, n, T, seed = args
    return experiment.pi_errors(cfg.spec_for(n, T, seed), cfg.estimator, np.arange(1, T + 1))


def _eta_task(args):
    cfg, n, T, seed, xs = args
    spec = cfg.spec_for(n, T, seed)
    scen = sim.generate(spec)
    state = build_state(scen.pool, [], cfg.estimator.delta, cfg.estimator.beta_bar, spec.space)
    eta_hat, radii = state.eta_batch(xs)
    eta_true, _ = sim.eta_values(spec, xs)
    return np.column_stack([np.asarray(xs, float), eta_true, eta_hat, radii])


def _tag(n, T, seed):
    return f"n{n}_T{T}_seed{seed}"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _overlay(cfg: ExperimentConfig, n: int, T: int) -> dict:
    spec = cfg.spec_for(n, T, cfg.seeds[0])
    tv = sim.tv_oracle(spec)
    if tv <= 0:
        return {"note": "no overlay: class conditionals coincide"}
    traj = spec.trajectory
    beta = float(traj.params.get("beta", 0.0)) if traj.kind == "holder" else 0.0
    const = float(traj.params.get("C", 0.0)) if traj.kind == "holder" else 0.0
    jumps = len(traj.params["levels"]) if traj.kind == "piecewise-jumps" else 1
    return sim.theory_bounds(n_min=n, delta=cfg.estimator.delta, tv=tv, T=T, m=T, beta=beta,
                             holder_constant=const, jumps=jumps,
                             path_variation=sim.tv_label_path(spec.pis))


def cmd_run(cfg: ExperimentConfig, out: Path, jobs: int) -> List[str]:
    cells = cfg.cells()
    results = parallel_map(_regret_task, [(cfg, n, T, s) for n, T, s in cells], jobs)
    files = []
    per_cell = {}
    for (n, T, seed), rows in zip(cells, results):
        name = f"regret_{_tag(n, T, seed)}.csv"
        write_file(out / name, csv_bytes(experiment.COLUMNS, rows, int_cols=(0, 6)))
        files.append(name)
        per_cell.setdefault((n, T), {})[seed] = rows
    summary = {"schema_version": SCHEMA_VERSION, "cells": []}
    for (n, T), by_seed in per_cell.items():
        entry = {"n": n, "T": T, "intervals": [], "overlay": _overlay(cfg, n, T)}
        for lo, hi in cfg.intervals_for(T):
            vals = {str(s): sim.dynamic_regret(r[:, 0].astype(int), r[:, 3], (lo, hi))
                    for s, r in sorted(by_seed.items())}
            arr = np.array(list(vals.values()))
            entry["intervals"].append({"interval": [lo, hi], "mean_regret": float(arr.mean()),
                                       "median_regret": float(np.median(arr)), "per_seed": vals})
        summary["cells"].append(entry)
    write_json(out / "summary.json", summary)
    files.append("summary.json")
    if cfg.emit_plots:
        write_file(out / "plot.gp", plot_script(files).encode("utf-8"))
        files.append("plot.gp")
    return files


def plot_script(files: Sequence[str]) -> str:
    csvs = [f for f in files if f.endswith(".csv")]
    lines = ["# gnuplot script; run with: gnuplot plot.gp",
             "set datafile separator ','",
             "set terminal pngcairo size 1000,700",
             "set key outside",
             "set output 'excess.png'",
             "set xlabel 't'",
             "set ylabel 'excess test error'"]
    lines.append("plot " + ", \\\n     ".join(
        f"'{f}' using 1:4 skip 1 with lines title '{f[:-4]}'" for f in csvs))
    lines += ["set output 'prior.png'", "set ylabel 'label probability'"]
    series = []
    for f in csvs:
        series.append(f"'{f}' using 1:5 skip 1 with lines title 'true {f[:-4]}'")
        series.append(f"'{f}' using 1:6 skip 1 with lines title 'estimate {f[:-4]}'")
    lines.append("plot " + ", \\\n     ".join(series))
    return "\n".join(lines) + "\n"


def cmd_estimate_pi(cfg: ExperimentConfig, out: Path, jobs: int) -> List[str]:
    cells = cfg.cells()
    results = parallel_map(_pi_task, [(cfg, n, T, s) for n, T, s in cells], jobs)
    files = []
    for (n, T, seed), rows in zip(cells, results):
        name = f"pi_{_tag(n, T, seed)}.csv"
        write_file(out / name, csv_bytes(("t", "pi_true", "pi_hat", "q_hat", "abs_err"), rows,
                                         int_cols=(0, 3)))
        files.append(name)
    return files


def parse_grid(text: str) -> dict:
    try:
        lo, hi, pts = text.split(":")
        grid = {"lo": float(lo), "hi": float(hi), "points": int(pts)}
    except ValueError:
        raise ConfigError(f"--grid: expected LO:HI:POINTS, got {text!r}") from None
    if grid["points"] < 1:
        raise ConfigError("--grid: need at least one point")
    return grid


def grid_points(cfg: ExperimentConfig, grid: Optional[dict]) -> np.ndarray:
    spec = cfg.spec_for(cfg.ns[0], cfg.Ts[0], cfg.seeds[0])
    if spec.discrete:
        return np.arange(spec.space.n_symbols)
    grid = grid or cfg.grid or {"lo": -3.0, "hi": 3.0, "points": 61}
    return np.linspace(float(grid["lo"]), float(grid["hi"]), int(grid["points"]))


def cmd_estimate_eta(cfg: ExperimentConfig, out: Path, jobs: int, grid: Optional[dict]) -> List[str]:
    xs = grid_points(cfg, grid)
    cells = [(n, s) for n in cfg.ns for s in cfg.seeds]
    T = cfg.Ts[0]
    results = parallel_map(_eta_task, [(cfg, n, T, s, xs) for n, s in cells], jobs)
    files = []
    for (n, seed), rows in zip(cells, results):
        name = f"eta_n{n}_seed{seed}.csv"
        write_file(out / name, csv_bytes(("x", "eta_true", "eta_hat", "chosen_radius"), rows))
        files.append(name)
    return files


def write_manifest(out: Path, cfg: ExperimentConfig, command: str, files, wall: float) -> None:
    write_json(out / "manifest.json", {
        "command": command, "config_sha256": config_hash(cfg.raw), "version": __version__,
        "seeds": list(cfg.seeds), "wall_clock_seconds": wall, "files": sorted(files)})


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="driftshift", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("run", "estimate-pi", "estimate-eta"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=None, help="output directory (overrides config)")
        p.add_argument("--seeds", default=None, help="comma-separated seed list override")
        p.add_argument("--jobs", type=int, default=None,
                       help="worker processes (default: $DRIFTSHIFT_JOBS or 1)")
        p.add_argument("--emit-plots", action="store_true")
        if name == "estimate-eta":
            p.add_argument("--grid", default=None, help="LO:HI:POINTS")
    sub.add_parser("selftest")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        results = selftest.run_all()
        print(selftest.format_table(results))
        failed = [name for name, ok, _ in results if not ok]
        if failed:
            print("FAILED: " + ", ".join(failed))
            return EXIT_SELFTEST
        return EXIT_OK
    try:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        seeds = None
        if args.seeds is not None:
            try:
                seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
            except ValueError:
                raise ConfigError(f"--seeds: expected comma-separated integers, got {args.seeds!r}") from None
        cfg = parse_config(text, seeds)
        if args.emit_plots:
            cfg = ExperimentConfig(**{**cfg.__dict__, "emit_plots": True})
        grid = parse_grid(args.grid) if getattr(args, "grid", None) else None
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out = prepare_out(args.out if args.out is not None else Path(cfg.outputs))
        jobs = resolve_jobs(args.jobs)
        start = time.perf_counter()
        if args.command == "run":
            files = cmd_run(cfg, out, jobs)
        elif args.command == "estimate-pi":
            files = cmd_estimate_pi(cfg, out, jobs)
        else:
            files = cmd_estimate_eta(cfg, out, jobs, grid)
        write_manifest(out, cfg, args.command, files + ["manifest.json"], time.perf_counter() - start)
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    print(f"wrote {len(files) + 1} files to {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
