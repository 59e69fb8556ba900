"""Command-line interface: simulate, fit, gof, forecast and bench.

Exit codes: 0 ok, 2 invalid input, 3 unstable model, 4 numerical failure.
Option values come from the command line first, then from the section of
the ``--config`` JSON file named after the subcommand (or its top level),
then from built-in defaults.
"""

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .bench import BENCH_FAMILIES, BenchScenario, default_grid, run_bench
from .exceptions import UnstableModelError
from .inference import FIT_FAMILIES, fit_mle, time_rescale_test
from .model import EventSequence, HawkesModel
from .seeding import spawn_seeds
from .simulate import FAST_PATHS, SimConfig, continue_from, simulate

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_UNSTABLE = 3
EXIT_NUMERIC = 4

DEFAULTS = {
    "simulate": {"horizon": None, "seed": 0, "out": None, "fast_path": "auto"},
    "fit": {"family": "omori", "out": None, "seed": 0, "n_starts": 5, "t_end": None},
    "gof": {"out": None, "qq_out": None, "t_end": None},
    "forecast": {
        "horizon": 24.0,
        "paths": 10000,
        "seed": 0,
        "jobs": 1,
        "out": None,
        "bins": 20,
        "t_end": None,
    },
    "bench": {
        "grid": "default",
        "seed": 0,
        "reps": 200,
        "target_points": 1000,
        "jobs": 1,
        "out": None,
        "table_out": None,
    },
}


class CliError(Exception):
    def __init__(self, message, code=EXIT_INVALID):
        super().__init__(message)
        self.code = code


# ----------------------------------------------------------------- helpers


def _load_model(path):
    path = Path(path)
    if not path.is_file():
        raise CliError(f"model file not found: {path}")
    return HawkesModel.from_json(path)


def _load_events(path, t_end=None):
    path = Path(path)
    if not path.is_file():
        raise CliError(f"data file not found: {path}")
    return EventSequence.from_csv(path, t_end=t_end)


def _emit(payload, out):
    text = json.dumps(payload, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _histogram(values, edges):
    counts, _ = np.histogram(values, bins=edges)
    return {"edges": [float(e) for e in edges], "counts": [int(c) for c in counts]}


# --------------------------------------------------------------- commands


def cmd_simulate(opts):
    model = _load_model(opts.model)
    if opts.horizon is None:
        raise CliError("--horizon is required")
    result = simulate(SimConfig(model, opts.horizon, int(opts.seed), fast_path=opts.fast_path))
    if opts.out:
        result.save(opts.out)
    summary = result.metadata()
    summary.pop("wall_time")
    _emit(summary, None)
    return EXIT_OK


def cmd_fit(opts):
    seq = _load_events(opts.data, opts.t_end)
    fit = fit_mle(seq, opts.family, n_starts=int(opts.n_starts), seed=int(opts.seed))
    _emit(fit.to_dict(), opts.out)
    return EXIT_OK


def cmd_gof(opts):
    seq = _load_events(opts.data, opts.t_end)
    model = _load_model(opts.model)
    gof = time_rescale_test(model, seq)
    if opts.qq_out:
        gof.qq_to_csv(opts.qq_out)
    payload = gof.to_dict()
    payload["model"] = model.to_dict()
    _emit(payload, opts.out)
    return EXIT_OK


def _forecast_paths(history, model, horizon, seeds):
    counts = np.empty(len(seeds), dtype=np.int64)
    background = np.empty(len(seeds), dtype=np.int64)
    for i, seed in enumerate(seeds):
        seq = continue_from(history, model, horizon, seed).seq
        counts[i] = len(seq)
        background[i] = np.count_nonzero(seq.parents == 0)
    return counts, background


def forecast(history, model, horizon, paths, seed=0, jobs=1, bins=20):
    """Simulate ``paths`` continuations of ``history`` and summarise them.

    Path ``i`` uses the ``i``-th seed of ``spawn_seeds(seed, paths)``, so
    the summary does not depend on ``jobs``. Paths without events have no
    background fraction and are left out of that histogram; the pooled
    fraction is background events over all events across paths.
    """
    paths = int(paths)
    if paths < 1:
        raise ValueError("paths must be positive")
    seeds = spawn_seeds(seed, paths)
    if jobs > 1 and paths > 1:
        chunks = np.array_split(np.arange(paths), min(jobs * 4, paths))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(
                pool.map(
                    _forecast_paths,
                    *zip(*[(history, model, horizon, [seeds[i] for i in c]) for c in chunks]),
                )
            )
        counts = np.concatenate([p[0] for p in parts])
        background = np.concatenate([p[1] for p in parts])
    else:
        counts, background = _forecast_paths(history, model, horizon, seeds)
    observed = background[counts > 0] / counts[counts > 0]
    count_hist = np.bincount(counts)
    return {
        "model": model.to_dict(),
        "history_events": int(history.all_times().size),
        "t_start": history.t_end,
        "horizon": float(horizon),
        "paths": paths,
        "seed": seed,
        "mean_count": float(counts.mean()),
        "count_quantiles": {
            str(q): float(np.quantile(counts, q)) for q in (0.05, 0.25, 0.5, 0.75, 0.95)
        },
        "count_histogram": {
            "values": list(range(count_hist.size)),
            "counts": [int(c) for c in count_hist],
        },
        "paths_without_events": int(paths - observed.size),
        "mean_background_fraction": float(observed.mean()) if observed.size else None,
        "pooled_background_fraction": float(background.sum() / counts.sum()) if counts.sum() else None,
        "background_fraction_histogram": _histogram(observed, np.linspace(0.0, 1.0, bins + 1)),
    }


def cmd_forecast(opts):
    history = _load_events(opts.data, opts.t_end)
    model = _load_model(opts.model)
    if not float(opts.horizon) > 0:
        raise CliError("--horizon must be positive")
    if int(opts.bins) < 1:
        raise CliError("--bins must be positive")
    summary = forecast(
        history,
        model,
        float(opts.horizon),
        int(opts.paths),
        int(opts.seed),
        int(opts.jobs),
        int(opts.bins),
    )
    _emit(summary, opts.out)
    return EXIT_OK


def _grid(name, reps, target_points):
    if name == "default":
        return default_grid(reps, target_points)
    # "family:norm,family:norm" selects a subset
    grid = []
    for item in name.split(","):
        family, _, norm = item.partition(":")
        if family not in BENCH_FAMILIES or not norm:
            raise CliError(f"bad grid entry {item!r}; expected family:norm")
        grid.append(BenchScenario(family, float(norm), reps=reps, target_points=target_points))
    return grid


def cmd_bench(opts):
    grid = _grid(opts.grid, int(opts.reps), int(opts.target_points))
    report = run_bench(grid, master_seed=int(opts.seed), n_jobs=int(opts.jobs))
    text = report.to_json(opts.out)
    if opts.table_out:
        Path(opts.table_out).write_text(report.format_table() + "\n", encoding="utf-8")
    if opts.out:
        sys.stdout.write(report.format_table() + "\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "gof": cmd_gof,
    "forecast": cmd_forecast,
    "bench": cmd_bench,
}


# ------------------------------------------------------------------ parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hazardhawkes",
        description="Simulate, fit and check Hawkes processes built from competing hazards.",
    )
    parser.add_argument("--config", help="JSON file with option defaults (flags take precedence)")
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    p = sub.add_parser("simulate", help="simulate events from a model JSON file")
    p.add_argument("model", help="model JSON: {'eta': ..., 'kernel': {'family': ...}}")
    p.add_argument("--horizon", type=float, default=S, help="end of the simulation window")
    p.add_argument("--seed", type=int, default=S, help="random seed (default 0)")
    p.add_argument("--out", default=S, help="events CSV; metadata goes to the .json sidecar")
    p.add_argument("--fast-path", choices=FAST_PATHS, default=S, help="simulator variant")

    p = sub.add_parser("fit", help="maximum-likelihood fit to an events CSV")
    p.add_argument("data", help="CSV with header time[,parent]")
    p.add_argument("--family", choices=FIT_FAMILIES, default=S, help="kernel family (default omori)")
    p.add_argument("--out", default=S, help="fit result JSON (default stdout)")
    p.add_argument("--seed", type=int, default=S, help="seed for the starting points")
    p.add_argument("--n-starts", type=int, default=S, help="optimiser starts (default 5)")
    p.add_argument("--t-end", type=float, default=S, help="window end (default last event)")

    p = sub.add_parser("gof", help="time-rescaling goodness-of-fit test")
    p.add_argument("data", help="CSV with header time[,parent]")
    p.add_argument("model", help="model JSON file")
    p.add_argument("--out", default=S, help="result JSON (default stdout)")
    p.add_argument("--qq-out", default=S, help="QQ-plot CSV (theoretical,empirical)")
    p.add_argument("--t-end", type=float, default=S, help="window end (default last event)")

    p = sub.add_parser("forecast", help="simulate continuations of observed events")
    p.add_argument("data", help="CSV of past events")
    p.add_argument("model", help="model JSON file")
    p.add_argument("--horizon", type=float, default=S, help="forecast length (default 24)")
    p.add_argument("--paths", type=int, default=S, help="number of paths (default 10000)")
    p.add_argument("--seed", type=int, default=S, help="random seed (default 0)")
    p.add_argument("--jobs", type=int, default=S, help="worker processes (default 1)")
    p.add_argument("--bins", type=int, default=S, help="background-fraction bins (default 20)")
    p.add_argument("--out", default=S, help="summary JSON (default stdout)")
    p.add_argument("--t-end", type=float, default=S, help="end of the history window")

    p = sub.add_parser("bench", help="simulator benchmark over the scenario grid")
    p.add_argument(
        "--grid", default=S, help="'default' or entries like 'omori:0.5,exponential:0.9'"
    )
    p.add_argument("--seed", type=int, default=S, help="master seed (default 0)")
    p.add_argument("--reps", type=int, default=S, help="replications per cell (default 200)")
    p.add_argument("--target-points", type=int, default=S, help="stationary events per path")
    p.add_argument("--jobs", type=int, default=S, help="worker processes (default 1)")
    p.add_argument("--out", default=S, help="report JSON (default stdout)")
    p.add_argument("--table-out", default=S, help="text table of rates and runtimes")
    return parser


def _resolve(args):
    """Merge flags > config file > defaults into one namespace."""
    config = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise CliError(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CliError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(raw, dict):
            raise CliError(f"{path}: config must be a JSON object")
        section = raw.get(args.command, {})
        if not isinstance(section, dict):
            raise CliError(f"{path}: section {args.command!r} must be an object")
        config = {k: v for k, v in raw.items() if k not in COMMANDS}
        config.update(section)
        config = {k.replace("-", "_"): v for k, v in config.items()}
    merged = dict(DEFAULTS[args.command])
    unknown = set(config) - set(merged)
    if unknown:
        raise CliError(f"unknown config keys for {args.command}: {sorted(unknown)}")
    merged.update(config)
    merged.update(vars(args))
    return argparse.Namespace(**merged)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _resolve(args)
        return COMMANDS[opts.command](opts)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except UnstableModelError as exc:
        print(f"error: unstable model: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (RuntimeError, ArithmeticError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
