"""Scenario grid x simulator benchmark: time-rescaling rejections and runtime.

Every cell (kernel family, norm, method) runs ``reps`` seeded replications.
Each replication records the time-rescaling p-value and the wall time of
the simulation call alone; runtime is reported as total time over total
points, in microseconds per point.

Published constants: ``eta = 2``; exponential kernels use ``beta = 1``,
Omori kernels ``p = 1, c = 1``, discrete kernels two bins of width 0.5; the
horizon is ``target_points * (1 - norm) / eta`` so a stationary path would
hold ``target_points`` events.
"""

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .baselines import ClusterConfig, ThinningConfig, cluster_simulate, thinning_simulate
from .inference import time_rescale_test
from .kernels import Gompertz, Omori, PiecewiseConstantHazard
from .model import HawkesModel
from .seeding import spawn_seeds
from .simulate import SimConfig, simulate

BENCH_FAMILIES = ("exponential", "omori", "discrete")
METHODS = ("hazards", "thinning", "cluster")
NORMS = (0.1, 0.5, 0.9)

EXP_BETA = 1.0
OMORI_P = 1.0
OMORI_C = 1.0
DISCRETE_DELTA = 0.5
DISCRETE_BINS = 2


def scenario_params(family, norm):
    """Kernel with integrated hazard exactly ``norm`` for a benchmark family."""
    norm = float(norm)
    if not 0 < norm < 1:
        raise ValueError(f"norm must lie in (0, 1), got {norm}")
    if family == "exponential":
        return Gompertz(norm * EXP_BETA, EXP_BETA)
    if family == "omori":
        return Omori(norm * OMORI_P * OMORI_C**OMORI_P, OMORI_C, OMORI_P)
    if family == "discrete":
        rate = norm / (DISCRETE_DELTA * DISCRETE_BINS)
        return PiecewiseConstantHazard(DISCRETE_DELTA, (rate,) * DISCRETE_BINS)
    raise ValueError(f"unknown benchmark family {family!r}")


@dataclass(frozen=True)
class BenchScenario:
    family: str
    norm: float
    eta: float = 2.0
    horizon: float = None
    reps: int = 200
    alpha_level: float = 0.05
    target_points: int = 1000

    def __post_init__(self):
        if self.family not in BENCH_FAMILIES:
            raise ValueError(f"family must be one of {BENCH_FAMILIES}")
        if self.horizon is None:
            object.__setattr__(
                self, "horizon", self.target_points * (1.0 - self.norm) / self.eta
            )
        if self.reps < 1:
            raise ValueError("reps must be positive")

    @property
    def model(self):
        return HawkesModel(self.eta, scenario_params(self.family, self.norm))


def default_grid(reps=200, target_points=1000):
    return [
        BenchScenario(f, n, reps=reps, target_points=target_points)
        for f in BENCH_FAMILIES
        for n in NORMS
    ]


@dataclass
class CellResult:
    family: str
    norm: float
    method: str
    reps: int
    rejection_rate: float = None
    runtime_us_per_point: float = None
    p_values: list = field(default_factory=list)
    n_points: list = field(default_factory=list)
    seeds: list = field(default_factory=list)
    error: str = None

    def key(self):
        return (self.family, self.norm, self.method)


@dataclass
class BenchReport:
    cells: list
    master_seed: int
    constants: dict

    def cell(self, family, norm, method):
        for c in self.cells:
            if c.key() == (family, float(norm), method):
                return c
        raise KeyError((family, norm, method))

    def to_dict(self, *, timings=True):
        cells = []
        for c in self.cells:
            d = asdict(c)
            if not timings:
                d.pop("runtime_us_per_point")
            cells.append(d)
        return {"master_seed": self.master_seed, "constants": self.constants, "cells": cells}

    def to_json(self, path=None, *, timings=True):
        text = json.dumps(self.to_dict(timings=timings), indent=2) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    def format_table(self):
        """Text table: families x norms across, methods down, two blocks."""
        families = [f for f in BENCH_FAMILIES if any(c.family == f for c in self.cells)]
        norms = sorted({c.norm for c in self.cells})
        methods = [m for m in METHODS if any(c.method == m for c in self.cells)]
        cols = [(f, n) for f in families for n in norms]
        head = f"{'':<10}" + "".join(f"{f[:5] + ' ' + format(n, 'g'):>12}" for f, n in cols)
        lines = [head, "rejection rate"]

        def row(method, attr, fmt):
            out = f"{method:<10}"
            for f, n in cols:
                try:
                    value = getattr(self.cell(f, n, method), attr)
                except KeyError:
                    value = None
                out += f"{'-' if value is None else format(value, fmt):>12}"
            return out

        lines += [row(m, "rejection_rate", ".3f") for m in methods]
        lines.append("runtime (us/point)")
        lines += [row(m, "runtime_us_per_point", ".2f") for m in methods]
        return "\n".join(lines)


def _simulate(method, model, horizon, seed):
    if method == "hazards":
        return simulate(SimConfig(model, horizon, seed))
    if method == "thinning":
        return thinning_simulate(ThinningConfig(model, horizon, seed))
    if method == "cluster":
        return cluster_simulate(ClusterConfig(model, horizon, seed))
    raise ValueError(f"unknown method {method!r}")


def run_cell(scenario, method, seeds):
    """Run one (scenario, method) cell over the given replication seeds."""
    cell = CellResult(scenario.family, float(scenario.norm), method, scenario.reps, seeds=list(seeds))
    model = scenario.model
    total_time = 0.0
    try:
        for seed in seeds:
            res = _simulate(method, model, scenario.horizon, seed)
            total_time += res.wall_time
            cell.n_points.append(len(res))
            if len(res) >= 2:
                cell.p_values.append(time_rescale_test(model, res.seq).p_value)
            else:
                cell.p_values.append(float("nan"))
    except Exception as exc:  # the cell is reported, the grid keeps going
        cell.error = f"seed {seed}: {type(exc).__name__}: {exc}"
        return cell
    p = np.asarray(cell.p_values)
    p = p[np.isfinite(p)]
    cell.rejection_rate = float(np.mean(p < scenario.alpha_level)) if p.size else None
    points = sum(cell.n_points)
    cell.runtime_us_per_point = 1e6 * total_time / points if points else None
    return cell


def run_bench(grid=None, methods=METHODS, master_seed=0, n_jobs=1):
    """Run every (scenario, method) cell; deterministic given ``master_seed``.

    Replication seeds for scenario ``i`` and method ``j`` are
    ``spawn_seeds(master_seed, reps, key=(i, j))``. Cells run in worker
    processes when ``n_jobs > 1``; sequential runs give cleaner timings.
    """
    grid = default_grid() if grid is None else list(grid)
    for scenario in grid:
        scenario.model  # fail fast on unstable scenarios
    jobs = []
    for i, scenario in enumerate(grid):
        for j, method in enumerate(methods):
            seeds = spawn_seeds(master_seed, scenario.reps, key=(i, METHODS.index(method)))
            jobs.append((scenario, method, seeds))
    if n_jobs == 1:
        cells = [run_cell(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            cells = list(pool.map(run_cell, *zip(*jobs)))
    constants = {
        "eta": sorted({s.eta for s in grid}),
        "horizons": {f"{s.family}:{s.norm:g}": s.horizon for s in grid},
        "reps": sorted({s.reps for s in grid}),
        "alpha_level": sorted({s.alpha_level for s in grid}),
        "exponential_beta": EXP_BETA,
        "omori_p": OMORI_P,
        "omori_c": OMORI_C,
        "discrete_delta": DISCRETE_DELTA,
        "discrete_bins": DISCRETE_BINS,
    }
    return BenchReport(cells=cells, master_seed=master_seed, constants=constants)
