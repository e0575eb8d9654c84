"""Command-line interface: solve, sweep, oracle, gda, bench subcommands.

Exit codes: 0 success, 2 bad configuration or usage, 3 numerical failure.
Flag values override config-file values, which override defaults.  The
default output directory comes from $MINMAXCBO_OUT (falling back to the
working directory).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .baselines import GdaConfig, gda_run
from .errors import ConfigError, InputError, NumericalError
from .harness import (
    CONFIG_KEYS,
    SWEEP_HORIZON,
    SWEEP_PARAMETERS,
    SweepSpec,
    benchmark_config,
    parse_config_file,
    run_sweep,
    timed_run_benchmark,
    write_run_csv,
    write_run_summary,
    write_sweep_csv,
)
from .objectives import BENCHMARK_IDS, make_benchmark
from .oracle import GridSpec, solve_minmax

__all__ = ["main"]


def _out_dir(arg: str | None) -> Path:
    path = Path(arg or os.environ.get("MINMAXCBO_OUT", "."))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--benchmark", choices=BENCHMARK_IDS, help="benchmark objective id")
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--seed", type=int)
    parser.add_argument("-N", "--n-particles", type=int, dest="n_particles")
    parser.add_argument("--lam", type=float, help="drift rate for both populations")
    parser.add_argument("--lambda-x", type=float, dest="lambda_x")
    parser.add_argument("--lambda-y", type=float, dest="lambda_y")
    parser.add_argument("--sigma", type=float, help="noise strength for both populations")
    parser.add_argument("--sigma-x", type=float, dest="sigma_x")
    parser.add_argument("--sigma-y", type=float, dest="sigma_y")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--dt", type=float, help="y-population step size")
    parser.add_argument("--epsilon", type=float, help="time-scale ratio dt_x / dt_y")
    parser.add_argument("-T", "--horizon", type=float)
    parser.add_argument("--diffusion", choices=("anisotropic", "isotropic"))
    parser.add_argument("--init", choices=("uniform_box", "border", "gaussian"))
    parser.add_argument("--init-mean", type=float, dest="init_mean")
    parser.add_argument("--init-std", type=float, dest="init_std")
    parser.add_argument("--project", dest="project", action="store_true", default=None)
    parser.add_argument("--no-project", dest="project", action="store_false")
    parser.add_argument("--box-x", dest="box_x", help="override x-domain, e.g. '-4,4'")
    parser.add_argument("--box-y", dest="box_y", help="override y-domain, e.g. '-4,4'")


_FLAG_KEYS = (
    "seed n_particles lambda_x lambda_y sigma_x sigma_y alpha beta dt epsilon "
    "horizon diffusion init init_mean init_std project box_x box_y"
).split()


def _collect_overrides(args: argparse.Namespace) -> tuple[str, dict]:
    """Merge defaults < config file < flags; returns (benchmark, overrides)."""
    overrides: dict = {}
    if args.config:
        overrides.update(parse_config_file(args.config))
    if getattr(args, "lam", None) is not None:
        overrides["lambda"] = args.lam
    if getattr(args, "sigma", None) is not None:
        overrides["sigma"] = args.sigma
    for key in _FLAG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            if key in ("box_x", "box_y") and isinstance(value, str):
                value = CONFIG_KEYS[key](value)
            overrides[key] = value
    benchmark = args.benchmark or overrides.pop("benchmark", None)
    overrides.pop("benchmark", None)
    if not benchmark:
        raise ConfigError("no benchmark specified (use --benchmark or a config file)")
    return benchmark, overrides


def _cmd_solve(args: argparse.Namespace) -> int:
    benchmark, overrides = _collect_overrides(args)
    record, config, wall = timed_run_benchmark(benchmark, overrides)
    out = _out_dir(args.out)
    prefix = args.prefix or f"run_{benchmark}_seed{config.seed}"
    d1 = record.final_ensemble.xs.shape[1]
    d2 = record.final_ensemble.ys.shape[1]
    csv_path = out / f"{prefix}.csv"
    json_path = out / f"{prefix}.json"
    write_run_csv(csv_path, record, d1, d2)
    summary = write_run_summary(json_path, record, config, benchmark, wall)
    print(json.dumps(summary, sort_keys=True))
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    benchmark, overrides = _collect_overrides(args)
    overrides.setdefault("horizon", SWEEP_HORIZON)
    overrides.setdefault("init", "border")
    config, _ = benchmark_config(benchmark, overrides)
    values = [float(v) for v in args.values.split(",") if v.strip()]
    spec = SweepSpec(
        parameter=args.parameter,
        values=values,
        benchmark=benchmark,
        base=config,
        trials=args.trials,
        jobs=args.jobs,
    )
    summaries = run_sweep(spec)
    out = _out_dir(args.out)
    prefix = args.prefix or f"sweep_{benchmark}_{args.parameter}"
    write_sweep_csv(out / f"{prefix}.csv", out / f"{prefix}_trials.csv", spec, summaries)
    for s in summaries:
        print(
            f"{args.parameter}={s.parameter_value:g}: median={s.median_error:.6g} "
            f"q20={s.q20:.6g} q80={s.q80:.6g}"
        )
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    if not args.benchmark:
        raise ConfigError("no benchmark specified")
    obj = make_benchmark(args.benchmark)
    grid = GridSpec(points_per_dim=args.points, refine_rounds=args.rounds)
    start = time.perf_counter()
    sol = solve_minmax(obj, grid)
    payload = {
        "schema": "minmaxcbo/oracle/v1",
        "benchmark": obj.name,
        "x_star": [float(v) for v in sol.x_star],
        "y_star": [float(v) for v in sol.y_star],
        "y_star_all": [[float(v) for v in y] for y in sol.y_star_all],
        "value": sol.value,
        "resolution": sol.resolution,
        "wall_time_s": time.perf_counter() - start,
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def _cmd_gda(args: argparse.Namespace) -> int:
    if not args.benchmark:
        raise ConfigError("no benchmark specified")
    obj = make_benchmark(args.benchmark)
    start_vals = [float(v) for v in args.start.split(",") if v.strip()]
    if len(start_vals) != obj.dim_x + obj.dim_y:
        raise ConfigError(f"--start needs {obj.dim_x + obj.dim_y} comma-separated numbers")
    config = GdaConfig(
        step_size=args.eta,
        iterations=args.iters,
        start=(np.array(start_vals[: obj.dim_x]), np.array(start_vals[obj.dim_x :])),
        mode=args.mode,
    )
    result = gda_run(obj, config)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("schema,iter," + ",".join(
                [f"x_{k}" for k in range(obj.dim_x)] + [f"y_{k}" for k in range(obj.dim_y)]
            ) + "\n")
            for k in range(len(result)):
                cells = [repr(float(v)) for v in (*result.xs[k], *result.ys[k])]
                fh.write(f"minmaxcbo/gda/v1,{k}," + ",".join(cells) + "\n")
    final_x, final_y = result.xs[-1], result.ys[-1]
    payload = {
        "schema": "minmaxcbo/gda/v1",
        "benchmark": obj.name,
        "mode": args.mode,
        "iterations": len(result) - 1,
        "final_x": [float(v) for v in final_x],
        "final_y": [float(v) for v in final_y],
        "final_norm": float(np.sqrt(np.sum(final_x**2) + np.sum(final_y**2))),
        "diverged": result.diverged,
    }
    print(json.dumps(payload, sort_keys=True))
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    from . import acceptance

    only = [int(v) for v in args.only.split(",")] if args.only else None
    results = acceptance.run_all(only=only)
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minmaxcbo",
        description="Consensus-based particle solver for min-max problems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="single seeded run with CSV/JSON output")
    _add_solver_flags(p_solve)
    p_solve.add_argument("--out", help="output directory")
    p_solve.add_argument("--prefix", help="output file prefix")
    p_solve.set_defaults(func=_cmd_solve)

    p_sweep = sub.add_parser("sweep", help="multi-trial parameter sweep")
    _add_solver_flags(p_sweep)
    p_sweep.add_argument("--parameter", required=True, choices=SWEEP_PARAMETERS)
    p_sweep.add_argument("--values", required=True, help="comma-separated parameter values")
    p_sweep.add_argument("--trials", type=int, default=100)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--out", help="output directory")
    p_sweep.add_argument("--prefix", help="output file prefix")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_oracle = sub.add_parser("oracle", help="grid-certified global min-max point")
    p_oracle.add_argument("--benchmark", choices=BENCHMARK_IDS, required=True)
    p_oracle.add_argument("--points", type=int, default=2049)
    p_oracle.add_argument("--rounds", type=int, default=3)
    p_oracle.add_argument("--out", help="write the JSON solution here as well")
    p_oracle.set_defaults(func=_cmd_oracle)

    p_gda = sub.add_parser("gda", help="gradient descent-ascent baseline")
    p_gda.add_argument("--benchmark", choices=BENCHMARK_IDS, required=True)
    p_gda.add_argument("--mode", choices=("simultaneous", "alternating"), default="simultaneous")
    p_gda.add_argument("--eta", type=float, default=0.1)
    p_gda.add_argument("--iters", type=int, default=100)
    p_gda.add_argument("--start", default="1,0", help="comma-separated start point")
    p_gda.add_argument("--out", help="trajectory CSV path")
    p_gda.set_defaults(func=_cmd_gda)

    p_bench = sub.add_parser("bench", help="run the acceptance suite")
    p_bench.add_argument("--only", help="comma-separated criterion numbers")
    p_bench.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
