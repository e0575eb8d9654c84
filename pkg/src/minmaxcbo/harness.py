"""Experiment harness: configuration, single runs, sweeps, CSV/JSON emission.

Sweep trial t of a parameter value always runs with seed base_seed + t, so
any row of a sweep can be reproduced standalone.  Quantiles use the
nearest-rank method: the q-quantile of n sorted values is the element at
index ceil(q * n) - 1.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .diagnostics import RunRecord, benchmark_reference, error_to_reference
from .dynamics import InitSpec, SolverConfig, run
from .errors import ConfigError, NumericalError
from .objectives import ObjectiveFunction, make_benchmark

__all__ = [
    "SweepSpec",
    "TrialSummary",
    "DEFAULT_HORIZONS",
    "SWEEP_HORIZON",
    "RUN_CSV_SCHEMA",
    "SWEEP_CSV_SCHEMA",
    "TRIAL_CSV_SCHEMA",
    "nearest_rank_quantile",
    "benchmark_config",
    "parse_config_file",
    "apply_overrides",
    "run_benchmark",
    "run_sweep",
    "write_run_csv",
    "write_run_summary",
    "write_sweep_csv",
]

SWEEP_PARAMETERS = ("n_particles", "alpha_beta", "sigma", "epsilon_scale")

# Single-run horizons per benchmark; sweeps use a longer common horizon.
DEFAULT_HORIZONS = {
    "bilinear": 15.0,
    "bivariate": 15.0,
    "bilinearly_coupled": 15.0,
    "forsaken": 15.0,
    "sixth_order": 30.0,
    "remark_function": 15.0,
}
SWEEP_HORIZON = 50.0

RUN_CSV_SCHEMA = "minmaxcbo/run/v1"
SWEEP_CSV_SCHEMA = "minmaxcbo/sweep/v1"
TRIAL_CSV_SCHEMA = "minmaxcbo/trials/v1"
RUN_JSON_SCHEMA = "minmaxcbo/summary/v1"

# Config file / override keys and their parsers.
_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _parse_bool(text: str) -> bool:
    v = text.strip().lower()
    if v in _BOOL_TRUE:
        return True
    if v in _BOOL_FALSE:
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_pair(text: str) -> tuple[float, float]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 2:
        raise ConfigError(f"expected two comma-separated numbers, got {text!r}")
    return float(parts[0]), float(parts[1])


CONFIG_KEYS = {
    "benchmark": str,
    "n_particles": int,
    "lambda": float,
    "lambda_x": float,
    "lambda_y": float,
    "sigma": float,
    "sigma_x": float,
    "sigma_y": float,
    "alpha": float,
    "beta": float,
    "dt": float,
    "epsilon": float,
    "horizon": float,
    "diffusion": str,
    "seed": int,
    "init": str,
    "init_mean": float,
    "init_std": float,
    "project": _parse_bool,
    "box_x": _parse_pair,
    "box_y": _parse_pair,
}


def parse_config_file(path: str) -> dict:
    """Read a flat ``key = value`` document; '#' starts a comment."""
    values: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, text = (part.strip() for part in line.split("=", 1))
            if key not in CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            parser = CONFIG_KEYS[key]
            try:
                values[key] = parser(text)
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def apply_overrides(config: SolverConfig, overrides: dict) -> SolverConfig:
    """Apply flat override keys onto a SolverConfig (benchmark/box keys excluded)."""
    cfg = config
    init = cfg.init
    for key, value in overrides.items():
        if key in ("benchmark", "box_x", "box_y"):
            continue
        if key == "lambda":
            cfg = replace(cfg, lambda_x=value, lambda_y=value)
        elif key == "sigma":
            cfg = replace(cfg, sigma_x=value, sigma_y=value)
        elif key == "dt":
            cfg = replace(cfg, dt_y=value)
        elif key == "epsilon":
            cfg = replace(cfg, epsilon_scale=value)
        elif key == "init":
            init = replace(init, mode=value)
        elif key == "init_mean":
            init = replace(init, mean=value)
        elif key == "init_std":
            init = replace(init, std=value)
        elif key in {f.name for f in fields(SolverConfig)}:
            cfg = replace(cfg, **{key: value})
        else:
            raise ConfigError(f"unknown configuration key {key!r}")
    return replace(cfg, init=init)


def benchmark_config(benchmark: str, overrides: dict | None = None) -> tuple[SolverConfig, ObjectiveFunction]:
    """Default solver configuration and objective for a benchmark.

    Defaults: N=20, dt=0.1, lambda=1, sigma=1.5, alpha=beta=1e4 and the
    per-benchmark horizon; overrides have the precedence the caller built
    (flags over file over defaults).
    """
    overrides = dict(overrides or {})
    obj = make_benchmark(
        benchmark, box_x=overrides.pop("box_x", None), box_y=overrides.pop("box_y", None)
    )
    config = SolverConfig(horizon=DEFAULT_HORIZONS.get(obj.name, 15.0), init=InitSpec())
    return apply_overrides(config, overrides).validate(), obj


def run_benchmark(benchmark: str, overrides: dict | None = None) -> tuple[RunRecord, SolverConfig]:
    """Single seeded run on a benchmark with its reference solution attached."""
    config, obj = benchmark_config(benchmark, overrides)
    record = run(config, obj, reference=benchmark_reference(obj.name))
    return record, config


@dataclass
class SweepSpec:
    """One-parameter sweep; alpha_beta moves alpha and beta jointly."""

    parameter: str
    values: list
    benchmark: str
    base: SolverConfig
    trials: int = 100
    jobs: int = 1

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"sweep parameter must be one of {SWEEP_PARAMETERS}")
        if not self.values:
            raise ConfigError("sweep needs at least one parameter value")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")


@dataclass
class TrialSummary:
    parameter_value: float
    median_error: float
    q20: float
    q80: float
    errors: list[float] = field(default_factory=list)


def nearest_rank_quantile(values: np.ndarray, q: float) -> float:
    """q-quantile by the nearest-rank rule on the sorted sample."""
    values = np.sort(np.asarray(values, dtype=float))
    if values.size == 0:
        return float("nan")
    rank = max(1, math.ceil(q * values.size))
    return float(values[rank - 1])


def _configured(spec: SweepSpec, value, trial: int) -> SolverConfig:
    cfg = replace(spec.base, seed=spec.base.seed + trial)
    if spec.parameter == "n_particles":
        cfg = replace(cfg, n_particles=int(value))
    elif spec.parameter == "alpha_beta":
        cfg = replace(cfg, alpha=float(value), beta=float(value))
    elif spec.parameter == "sigma":
        cfg = replace(cfg, sigma_x=float(value), sigma_y=float(value))
    else:
        cfg = replace(cfg, epsilon_scale=float(value))
    return cfg


def _sweep_trial(args: tuple) -> float:
    """Best-pair squared error of one seeded run; NaN flags a failed trial."""
    benchmark, cfg = args
    obj = make_benchmark(benchmark)
    ref = benchmark_reference(benchmark)
    try:
        record = run(cfg, obj, reference=ref)
    except NumericalError:
        return float("nan")
    bx, by = record.best_pair_trace[-1]
    return error_to_reference((bx, by), ref)


def run_sweep(spec: SweepSpec) -> list[TrialSummary]:
    """Run trials x values seeded runs and summarize errors per value.

    Trial t uses seed base.seed + t.  Rows are ordered by (value, trial)
    regardless of execution order; failed trials enter the error list as
    NaN and are excluded from the quantiles.
    """
    tasks = [
        (value, trial, (spec.benchmark, _configured(spec, value, trial)))
        for value in spec.values
        for trial in range(spec.trials)
    ]
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            results = list(pool.map(_sweep_trial, [t[2] for t in tasks]))
    else:
        results = [_sweep_trial(t[2]) for t in tasks]
    summaries = []
    for vi, value in enumerate(spec.values):
        errors = results[vi * spec.trials : (vi + 1) * spec.trials]
        finite = np.asarray([e for e in errors if math.isfinite(e)])
        summaries.append(
            TrialSummary(
                parameter_value=float(value),
                median_error=nearest_rank_quantile(finite, 0.5),
                q20=nearest_rank_quantile(finite, 0.2),
                q80=nearest_rank_quantile(finite, 0.8),
                errors=list(errors),
            )
        )
    return summaries


def _fmt(value) -> str:
    """Shortest round-trip decimal form; deterministic for byte comparisons."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_run_csv(path, record: RunRecord, d1: int, d2: int) -> None:
    header = (
        ["schema", "step", "t", "Vx", "Vy", "V", "spread_x", "spread_y"]
        + [f"mean_x_{k}" for k in range(d1)]
        + [f"mean_y_{k}" for k in range(d2)]
        + ["best_value", "best_err"]
    )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k in range(len(record)):
            row = [
                RUN_CSV_SCHEMA,
                k,
                _fmt(record.times[k]),
                _fmt(record.variance_x[k]),
                _fmt(record.variance_y[k]),
                _fmt(record.variance_x[k] + record.variance_y[k]),
                _fmt(record.spread_x[k]),
                _fmt(record.spread_y[k]),
            ]
            row += [_fmt(v) for v in record.mean_x[k]]
            row += [_fmt(v) for v in record.mean_y[k]]
            row += [_fmt(record.best_value_trace[k]), _fmt(record.best_error_trace[k])]
            writer.writerow(row)


def write_run_summary(path, record: RunRecord, config: SolverConfig, benchmark: str, wall_time: float) -> dict:
    bx, by = record.best_pair_trace[-1]
    summary = {
        "schema": RUN_JSON_SCHEMA,
        "benchmark": benchmark,
        "seed": config.seed,
        "n_particles": config.n_particles,
        "horizon": config.horizon,
        "dt_y": config.dt_y,
        "epsilon_scale": config.epsilon_scale,
        "steps": len(record) - 1,
        "best_x": [float(v) for v in bx],
        "best_y": [float(v) for v in by],
        "best_value": float(record.best_value_trace[-1]),
        "best_err": float(record.best_error_trace[-1]),
        "eval_count": record.eval_count,
        "wall_time_s": wall_time,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def write_sweep_csv(summary_path, trials_path, spec: SweepSpec, summaries: list[TrialSummary]) -> None:
    with open(summary_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["schema", "parameter", "value", "median_error", "q20", "q80", "n_ok", "trials"])
        for s in summaries:
            n_ok = sum(1 for e in s.errors if math.isfinite(e))
            writer.writerow(
                [SWEEP_CSV_SCHEMA, spec.parameter, _fmt(s.parameter_value), _fmt(s.median_error),
                 _fmt(s.q20), _fmt(s.q80), n_ok, spec.trials]
            )
    with open(trials_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["schema", "parameter", "value", "trial", "seed", "error"])
        for s in summaries:
            for trial, err in enumerate(s.errors):
                writer.writerow(
                    [TRIAL_CSV_SCHEMA, spec.parameter, _fmt(s.parameter_value), trial,
                     spec.base.seed + trial, _fmt(err)]
                )


def timed_run_benchmark(benchmark: str, overrides: dict | None = None):
    """run_benchmark plus wall time, for the CLI summary."""
    start = time.perf_counter()
    record, config = run_benchmark(benchmark, overrides)
    return record, config, time.perf_counter() - start
