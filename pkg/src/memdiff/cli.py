"""Batch front door: load a problem config, run solves and checks, emit reports.

Commands
  validate     audit the problem conditions, print the per-condition report
  solve        evaluate the field on a grid, write CSV (s,x,u,side)
  check        run one named check suite, write a JSON report
  compare-mc   solver vs Monte Carlo z-scores per grid point

Exit codes: 0 success / all checks passed, 1 some check failed, 2 config or
validation error, 3 solver divergence or unreliable simulation step, 4 I/O
error.  Reports carry no timestamps, so reruns with identical inputs are
byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .boundary_system import SolverConfig, first_kind_residual, solve_densities
from .errors import (
    ConfigError,
    MemdiffError,
    SeriesDivergenceError,
    StepTooLargeError,
)
from .mc_oracle import SimConfig, compare, simulate
from .parametrix import moment_residuals
from .problem import InitialFunction, Problem, validate
from .semigroup import SemigroupOperator

REPORT_SCHEMA = "report.v1"
PROBLEM_SCHEMA = "problem.v1"


def fmt_sig(value: float, precision: int = 12) -> str:
    """Locale-independent fixed-significant-digit decimal formatting."""
    return f"{value:.{precision}g}"


def load_run_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    if "problem_file" in cfg:
        base = Path(path).parent / cfg["problem_file"]
        try:
            with open(base, "r", encoding="utf-8") as fh:
                cfg["problem"] = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read problem file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {base}: {exc}") from exc
    if "problem" not in cfg:
        raise ConfigError("config missing key 'problem' (or 'problem_file')")
    return cfg


def build_problem(cfg: dict) -> Problem:
    return Problem.from_dict(cfg["problem"])


def build_phi(cfg: dict) -> InitialFunction:
    phi_cfg = cfg.get("phi", {"kind": "constant-one", "params": [1.0]})
    try:
        return InitialFunction.from_dict(phi_cfg)
    except KeyError as exc:
        raise ConfigError(f"phi object missing key {exc}") from exc


def build_grid(cfg: dict) -> np.ndarray:
    grid = cfg.get("grid", {"min": -2.0, "max": 2.0, "n": 21})
    for key in ("min", "max", "n"):
        if key not in grid:
            raise ConfigError(f"grid object missing key {key!r}")
    if grid["n"] < 1:
        raise ConfigError("grid n must be positive")
    return np.linspace(grid["min"], grid["max"], int(grid["n"]))


def build_solver(cfg: dict) -> SolverConfig:
    overrides = cfg.get("solver", {})
    try:
        return SolverConfig(**overrides)
    except TypeError as exc:
        raise ConfigError(f"bad solver override: {exc}") from exc


def times(cfg: dict) -> tuple:
    s = cfg.get("s", 0.0)
    t = cfg.get("t")
    if t is None:
        raise ConfigError("config missing key 't'")
    return s, float(t)


def write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc


def report_json(command: str, entries: list, extra: dict | None = None) -> str:
    payload = {
        "schema": REPORT_SCHEMA,
        "command": command,
        "passed": all(e["pass"] for e in entries),
        "checks": entries,
    }
    if extra:
        payload.update(extra)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def entry(check: str, case: str, statistic: float, tolerance: float) -> dict:
    return {"check": check, "case": case, "statistic": float(statistic),
            "tolerance": float(tolerance), "pass": bool(statistic <= tolerance)}


# -- commands -------------------------------------------------------------------


def cmd_validate(cfg: dict, args) -> int:
    problem = build_problem(cfg)
    report = validate(problem, cfg.get("grid_resolution", 65))
    text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    write_text(args.out, text)
    return 0 if report.passed else 1


def cmd_solve(cfg: dict, args) -> int:
    problem = build_problem(cfg)
    phi = build_phi(cfg)
    s, t = times(cfg)
    grid = build_grid(cfg)
    precision = int(cfg.get("precision", 12))
    report = validate(problem, cfg.get("grid_resolution", 33))
    if not report.passed:
        raise ConfigError("problem failed validation; run the validate command")
    op = SemigroupOperator(problem, build_solver(cfg))
    s_values = s if isinstance(s, list) else [s]
    lines = ["s,x,u,side"]
    for s_val in s_values:
        field = op.apply(float(s_val), t, phi)
        values = field(grid)
        for x_val, u_val in zip(grid, np.atleast_1d(values)):
            side = problem.side_of(float(s_val), float(x_val))
            lines.append(",".join([fmt_sig(float(s_val), precision),
                                   fmt_sig(float(x_val), precision),
                                   fmt_sig(float(u_val), precision), side]))
    write_text(args.out, "\n".join(lines) + "\n")
    if args.dump_kernels:
        _dump_kernels(problem, phi, t, float(s_values[0]), build_solver(cfg),
                      args.dump_kernels)
    return 0


def _dump_kernels(problem, phi, t, s_min, solver, path):
    from .boundary_system import KernelAssembler
    dens = solve_densities(problem, phi, t, s_min=s_min, config=solver)
    assembler = KernelAssembler(problem, config=solver)
    sample_s = [float(v) for v in dens.mesh[:: max(1, len(dens.mesh) // 8)]]
    kernels = []
    for sv in sample_s:
        taus = [float(v) for v in np.linspace(sv, t, 6)[1:-1]]
        kernels.append({
            "s": sv,
            "tau": taus,
            "values": [[assembler.system_kernel_value(i, j, sv, tv)
                        for tv in taus] for i in (1, 2) for j in (1, 2)],
        })
    payload = {
        "schema": "kernel-dump.v1",
        "terminal_time": t,
        "mesh": [float(v) for v in dens.mesh],
        "w1": [float(v) for v in dens.w1],
        "w2": [float(v) for v in dens.w2],
        "kernels": kernels,
    }
    write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def cmd_check(cfg: dict, args) -> int:
    problem = build_problem(cfg)
    phi = build_phi(cfg)
    s, t = times(cfg)
    s = float(s if not isinstance(s, list) else s[0])
    grid = build_grid(cfg)
    suite = cfg.get("suite", args.suite)
    if suite not in ("semigroup", "conjugation", "generator", "parametrix"):
        raise ConfigError(f"unknown check suite {suite!r}")
    op = SemigroupOperator(problem, build_solver(cfg))
    entries = []

    if suite == "semigroup":
        one = InitialFunction.one()
        dev = float(np.max(np.abs(op.apply(s, t, one)(grid) - 1.0)))
        entries.append(entry("conservation", "constant-one", dev, 1e-3))
        mid = 0.5 * (s + t)
        gap = op.chapman_kolmogorov_gap(s, mid, t, phi, grid)
        entries.append(entry("chapman-kolmogorov", "midpoint", gap, 5e-3))
        mn, sup = op.positivity_contraction(s, t, phi, grid)
        entries.append(entry("positivity", "min-value", max(-mn, 0.0),
                             1e-4 * phi.sup_norm))
        entries.append(entry("contraction", "sup-norm",
                             max(sup - phi.sup_norm, 0.0), 1e-3 * phi.sup_norm))
    elif suite == "conjugation":
        for s_chk in np.linspace(s, 0.5 * (s + t), 3):
            b1, b2 = op.conjugation_residuals(float(s_chk), t, phi)
            entries.append(entry("continuity", f"s={fmt_sig(float(s_chk), 6)}",
                                 abs(b1), 1e-3 * phi.sup_norm))
            entries.append(entry("flux", f"s={fmt_sig(float(s_chk), 6)}",
                                 abs(b2), 5e-3 * phi.sup_norm))
        dens = op.densities(s, t, phi)
        resid = first_kind_residual(problem, phi, t, dens, op.evaluator)
        entries.append(entry("first-kind-residual", "mesh-max",
                             float(np.max(np.abs(resid))), 1e-3 * phi.sup_norm))
    elif suite == "generator":
        f = InitialFunction("polynomial-clamped", [float(problem.h(s)), 0.8, 2.0, 1.0])
        lhs, rhs = op.weak_generator_pairing(s, phi, f, [0.04, 0.02, 0.01])
        errs = [abs(v - rhs) for v in lhs]
        entries.append(entry("weak-generator", "dt=0.01", errs[-1],
                             5e-2 * (abs(rhs) + 1)))
        mono = 0.0 if errs[0] >= errs[1] >= errs[2] else 1.0
        entries.append(entry("weak-generator-monotone", "dt-sequence", mono, 0.5))
    else:  # parametrix
        for i in (1, 2):
            res = moment_residuals(op.evaluator.fs[i], s, float(problem.h(s)), t)
            for k, r in enumerate(res):
                entries.append(entry("moment-identity", f"side{i}-order{k}",
                                     r, 1e-3))

    write_text(args.out, report_json(f"check:{suite}", entries))
    return 0 if all(e["pass"] for e in entries) else 1


def cmd_compare_mc(cfg: dict, args) -> int:
    problem = build_problem(cfg)
    phi = build_phi(cfg)
    s, t = times(cfg)
    s = float(s if not isinstance(s, list) else s[0])
    grid = build_grid(cfg)
    mc_cfg = dict(cfg.get("mc", {}))
    if args.paths is not None:
        mc_cfg["paths"] = args.paths
    if args.seed is not None:
        mc_cfg["seed"] = args.seed
    config = SimConfig(**mc_cfg)
    op = SemigroupOperator(problem, build_solver(cfg))
    field = op.apply(s, t, phi)

    def one_point(x_val):
        solver_val = float(field(float(x_val)))
        res = simulate(problem, s, float(x_val), t, phi, config)
        return compare(solver_val, res.mean, res.stderr)
    if args.threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            comparisons = list(pool.map(one_point, grid))
    else:
        comparisons = [one_point(x) for x in grid]
    entries = []
    results = []
    for x_val, c in zip(grid, comparisons):
        results.append(c.to_dict())
        entries.append(entry("mc-z-score", f"x={fmt_sig(float(x_val), 6)}",
                             c.z_score, c.k_sigma))
    write_text(args.out, report_json("compare-mc", entries,
                                     {"results": results,
                                      "paths": config.paths,
                                      "seed": config.seed}))
    return 0 if all(e["pass"] for e in entries) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="memdiff",
                                description="membrane-diffusion semigroup solver")
    p.add_argument("command",
                   choices=["validate", "solve", "check", "compare-mc"])
    p.add_argument("--config", required=True, help="run configuration JSON")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--threads", type=int, default=1,
                   help="worker thread cap for per-point Monte Carlo runs")
    p.add_argument("--dump-kernels", default=None,
                   help="write kernel tables and density mesh to this path")
    p.add_argument("--seed", type=int, default=None, help="Monte Carlo seed")
    p.add_argument("--paths", type=int, default=None, help="Monte Carlo paths")
    p.add_argument("--suite", default="semigroup",
                   help="check suite when not given in the config")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_run_config(args.config)
        if args.command == "validate":
            return cmd_validate(cfg, args)
        if args.command == "solve":
            return cmd_solve(cfg, args)
        if args.command == "check":
            return cmd_check(cfg, args)
        return cmd_compare_mc(cfg, args)
    except (ConfigError,) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SeriesDivergenceError, StepTooLargeError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except IOError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4
    except MemdiffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
