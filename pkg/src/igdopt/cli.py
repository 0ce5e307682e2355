"""Command-line driver for the solvers and desk-scale experiments.

Subcommands::

    igdopt igd        --fn quad --mu 3 --eps1 1 --theta 0.8 ...
    igdopt lasso-grid --sizes 100x200,200x400 --seeds 0,1 --methods ...
    igdopt rates      --p 2,4 ...
    igdopt deblur     --side 32 ...

Exit codes: 0 converged (or stationarity certificate), 2 budget exhausted,
1 runtime error, 64 usage error.  Config precedence: flags > key=value
config file > preset defaults.  The output root defaults to the current
directory and can be set with the IGDOPT_OUTPUT environment variable.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import alm, lasso, rates
from .core import SmoothProblem
from .igd import (BudgetExhausted, Converged, IgdConfig, OracleFailure,
                  StationaryCertificate, igd_solve)
from .oracles import ExactOracle, FfdOracle, NoisyOracle
from .trace import format_metadata, write_trace_csv

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BUDGET = 2
EXIT_USAGE = 64

logger = logging.getLogger(__name__)


class UsageError(Exception):
    pass


def _make_zoo_problem(name: str) -> SmoothProblem:
    """Named smooth test functions runnable from the command line."""
    if name == "quad":
        return SmoothProblem(
            dim=2, value=lambda x: 0.5 * (x[0] ** 2 + 4.0 * x[1] ** 2),
            grad=lambda x: np.array([x[0], 4.0 * x[1]]),
            lipschitz_L=4.0, name="quad")
    if name == "sphere":
        return SmoothProblem(
            dim=5, value=lambda x: 0.5 * float(x @ x),
            grad=lambda x: np.asarray(x, dtype=float),
            lipschitz_L=1.0, name="sphere")
    if name.startswith("norm-power-"):
        p = float(name.rsplit("-", 1)[1])
        _, problem = rates.make_kl_function(p, dim=2, region_radius=2.0)
        return problem
    raise UsageError(f"unknown test function {name!r}; "
                     "choose quad, sphere, or norm-power-<p>")


def _load_config_file(path: str) -> dict:
    """Plain key=value lines; '#' starts a comment."""
    values = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"bad config line {raw.rstrip()!r}")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
    return values


def _output_root(args) -> str:
    root = args.output or os.environ.get("IGDOPT_OUTPUT") or "."
    os.makedirs(root, exist_ok=True)
    return root


def _merge(args, config: dict, name: str, cast, default):
    """flags > config file > default."""
    flag = getattr(args, name.replace("-", "_"), None)
    if flag is not None:
        return flag
    if name in config:
        return cast(config[name])
    return default


def _status_exit(status) -> int:
    if isinstance(status, (Converged, StationaryCertificate)):
        return EXIT_OK
    if isinstance(status, BudgetExhausted):
        return EXIT_BUDGET
    return EXIT_ERROR


def cmd_igd(args) -> int:
    config = _load_config_file(args.config) if args.config else {}
    problem = _make_zoo_problem(_merge(args, config, "fn", str, "quad"))
    mu = _merge(args, config, "mu", float, 3.0)
    eps1 = _merge(args, config, "eps1", float, 1.0)
    theta = _merge(args, config, "theta", float, 0.8)
    max_outer = _merge(args, config, "max-iter", int, 10_000)
    eps_tol = _merge(args, config, "eps-tol", float, 1e-8)
    time_budget = _merge(args, config, "time-budget", float, math.inf)
    seed = _merge(args, config, "seed", int, 0)
    oracle_kind = _merge(args, config, "oracle", str, "noisy")
    try:
        cfg = IgdConfig(lipschitz_L=problem.lipschitz_L, eps1=eps1,
                        theta=theta, mu=mu, max_outer=max_outer,
                        eps_tol=eps_tol, time_budget=time_budget)
    except ValueError as exc:
        raise UsageError(str(exc))
    if oracle_kind == "noisy":
        oracle = NoisyOracle(problem, np.random.default_rng(seed))
    elif oracle_kind == "exact":
        oracle = ExactOracle(problem)
    elif oracle_kind == "ffd":
        oracle = FfdOracle(problem.value, problem.lipschitz_L)
    else:
        raise UsageError(f"unknown oracle {oracle_kind!r}")
    rng = np.random.default_rng(seed + 1)
    x1 = rng.standard_normal(problem.dim)
    x, trace, status = igd_solve(problem, oracle, cfg, x1=x1)
    trace.method = "IGD"
    trace.metadata.update({"method": "IGD", "fn": problem.name,
                           "oracle": oracle_kind, "seed": seed,
                           "status": type(status).__name__})
    root = _output_root(args)
    out = os.path.join(root, f"igd_{problem.name}_{oracle_kind}_{seed}.csv")
    write_trace_csv(trace, out, wall_times=args.wall_times)
    print(f"status={type(status).__name__} iters={len(trace)} "
          f"final_norm={trace.metadata['final_norm']:.3e} trace={out}")
    return _status_exit(status)


def _parse_sizes(text: str):
    sizes = []
    for part in filter(None, text.split(",")):
        m, _, n = part.partition("x")
        sizes.append((int(m), int(n)))
    return sizes


def _run_grid_cell(cell):
    m, n, seed, method, gamma_factor, lam, eta_tol, max_outer, budget = cell
    inst = lasso.gen_random_instance(m, n, ("scaled", gamma_factor),
                                    seed=seed, lam=lam)
    summary, trace = lasso.gialm_lasso_solve(
        inst, preset=method, eta_tol=eta_tol, max_outer=max_outer,
        time_budget=budget)
    test_id = f"m{m}n{n}s{seed}"
    return test_id, summary


def cmd_lasso_grid(args) -> int:
    config = _load_config_file(args.config) if args.config else {}
    sizes = _parse_sizes(_merge(args, config, "sizes", str, "100x200,200x400"))
    seeds = [int(s) for s in
             _merge(args, config, "seeds", str, "0").split(",") if s]
    methods = [s for s in
               _merge(args, config, "methods", str,
                      "GIALM-1.1,GIALM-3,IALM-1.5,IALM-2").split(",") if s]
    if not sizes or not seeds or not methods:
        raise UsageError("empty grid: need sizes, seeds, and methods")
    for method in methods:
        if not (method.startswith("GIALM-") or method.startswith("IALM-")):
            raise UsageError(f"unknown method preset {method!r}")
    gamma_factor = _merge(args, config, "gamma-factor", float, 1e-3)
    lam = _merge(args, config, "lam", float, 0.01)
    eta_tol = _merge(args, config, "eta-tol", float, 1e-6)
    max_outer = _merge(args, config, "max-iter", int, 200_000)
    budget = _merge(args, config, "time-budget", float, 4000.0)
    workers = _merge(args, config, "workers", int, 1)
    cells = [(m, n, seed, method, gamma_factor, lam, eta_tol, max_outer,
              budget)
             for (m, n) in sizes for seed in seeds for method in methods]
    rows = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_grid_cell, cells))
    else:
        results = []
        for cell in cells:
            try:
                results.append(_run_grid_cell(cell))
            except Exception as exc:  # keep the grid going on cell failure
                logger.error("grid cell %s failed: %s", cell, exc)
                m, n, seed, method = cell[:4]
                results.append((f"m{m}n{n}s{seed}",
                                {"method": method, "m": m, "n": n,
                                 "iter": 0, "eta": math.nan,
                                 "total_inner": 0, "time_s": 0.0,
                                 "status": "Error"}))
    for test_id, summary in results:
        rows.append(lasso.format_grid_summary_row(test_id, summary,
                                                  wall_times=args.wall_times))
    root = _output_root(args)
    out = os.path.join(root, "lasso_grid.csv")
    with open(out, "w") as fh:
        fh.write(",".join(lasso.GRID_SUMMARY_COLUMNS) + "\n")
        fh.write("\n".join(rows) + "\n")
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def cmd_rates(args) -> int:
    config = _load_config_file(args.config) if args.config else {}
    p_values = [float(s) for s in
                _merge(args, config, "p", str, "2,4").split(",") if s]
    for p in p_values:
        if p < 2.0:
            raise UsageError(f"p={p} rejected: gradient not Lipschitz at 0")
    seed = _merge(args, config, "seed", int, 0)
    max_outer = _merge(args, config, "max-iter", int, 20_000)
    rows = rates.rate_report_rows(p_values, seed=seed, max_outer=max_outer)
    root = _output_root(args)
    out = os.path.join(root, "rate_report.csv")
    rates.write_rate_report(rows, out)
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def cmd_deblur(args) -> int:
    config = _load_config_file(args.config) if args.config else {}
    side = _merge(args, config, "side", int, 32)
    if side > lasso.MAX_BLUR_SIDE:
        raise UsageError(f"side={side} exceeds the desk-scale cap "
                         f"{lasso.MAX_BLUR_SIDE}")
    seed = _merge(args, config, "seed", int, 0)
    gamma = _merge(args, config, "gamma", float, 1e-4)
    lam = _merge(args, config, "lam", float, 5.0)
    eta_tol = _merge(args, config, "eta-tol", float, 1e-6)
    max_outer = _merge(args, config, "max-iter", int, 2000)
    budget = _merge(args, config, "time-budget", float, 600.0)
    methods = [s for s in
               _merge(args, config, "methods", str,
                      "GIALM-3,IALM-2").split(",") if s]
    inst = lasso.blur_instance(side=side, seed=seed, gamma=gamma, lam=lam)
    root = _output_root(args)
    code = EXIT_OK
    for method in methods:
        summary, trace = lasso.gialm_lasso_solve(
            inst, preset=method, eta_tol=eta_tol, max_outer=max_outer,
            time_budget=budget, x1=inst.b.copy())
        out = os.path.join(root, f"deblur_{method}.csv")
        write_trace_csv(trace, out, wall_times=args.wall_times)
        x = np.clip(summary["x_final"], 0.0, None)
        lasso.write_pgm(x.reshape(side, side),
                        os.path.join(root, f"deblur_{method}.pgm"))
        print(f"{method}: status={summary['status']} iters={summary['iter']} "
              f"eta={summary['eta']:.3e} trace={out}")
        if summary["status"] == "BudgetExhausted":
            code = EXIT_BUDGET
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="igdopt",
        description="Inexact gradient descent solvers and desk-scale "
                    "benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--output", help="output directory "
                       "(default $IGDOPT_OUTPUT or .)")
        p.add_argument("--wall-times", action="store_true",
                       help="write measured wall times into CSV bodies "
                       "(breaks byte-identical reproducibility)")
        p.add_argument("--seed", type=int)
        p.add_argument("--max-iter", type=int, dest="max_iter")
        p.add_argument("--time-budget", type=float, dest="time_budget")

    p_igd = sub.add_parser("igd", help="run the adaptive inexact gradient "
                           "loop on a named test function")
    common(p_igd)
    p_igd.add_argument("--fn")
    p_igd.add_argument("--mu", type=float)
    p_igd.add_argument("--eps1", type=float)
    p_igd.add_argument("--theta", type=float)
    p_igd.add_argument("--eps-tol", type=float, dest="eps_tol")
    p_igd.add_argument("--oracle", choices=["noisy", "exact", "ffd"])
    p_igd.set_defaults(func=cmd_igd)

    p_grid = sub.add_parser("lasso-grid", help="random-instance benchmark "
                            "grid with a Table-style summary CSV")
    common(p_grid)
    p_grid.add_argument("--sizes")
    p_grid.add_argument("--seeds")
    p_grid.add_argument("--methods")
    p_grid.add_argument("--gamma-factor", type=float, dest="gamma_factor")
    p_grid.add_argument("--lam", type=float)
    p_grid.add_argument("--eta-tol", type=float, dest="eta_tol")
    p_grid.add_argument("--workers", type=int)
    p_grid.set_defaults(func=cmd_lasso_grid)

    p_rates = sub.add_parser("rates", help="convergence-rate lab report")
    common(p_rates)
    p_rates.add_argument("--p")
    p_rates.set_defaults(func=cmd_rates)

    p_deblur = sub.add_parser("deblur", help="desk-scale synthetic "
                              "deblurring run")
    common(p_deblur)
    p_deblur.add_argument("--side", type=int)
    p_deblur.add_argument("--gamma", type=float)
    p_deblur.add_argument("--lam", type=float)
    p_deblur.add_argument("--eta-tol", type=float, dest="eta_tol")
    p_deblur.add_argument("--methods")
    p_deblur.set_defaults(func=cmd_deblur)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        logger.exception("run failed: %s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
