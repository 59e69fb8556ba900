"""Competing-hazards (Gillespie-type) simulation of Hawkes processes.

Every past event ``j`` owns a timer distributed as ``V - (now - T_j)`` given
``V >= now - T_j`` with ``V`` drawn from the kernel's waiting-time law, and
the baseline owns an Exponential(eta) timer. The next event is the earliest
finite timer and its owner is recorded as the parent. All timers are redrawn
after each event.

The process starts with no events at the window start (or at the end of the
supplied history); there is no deterministic event at the origin.
"""

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import check_rng
from .exceptions import UnsupportedKernelError
from .kernels import Gompertz
from .model import EventSequence, HawkesModel

FAST_PATHS = ("auto", "off", "min_stable")


@dataclass(frozen=True)
class SimConfig:
    """Simulation request on ``(start, horizon]``.

    ``horizon`` is an absolute end time; ``start`` is ``pre_history.t_end``
    when a history is supplied, else 0.
    """

    model: HawkesModel
    horizon: float
    seed: object = None
    pre_history: EventSequence = None
    fast_path: str = "auto"
    prune: bool = True

    def __post_init__(self):
        if not isinstance(self.model, HawkesModel):
            raise TypeError("model must be a HawkesModel")
        horizon = float(self.horizon)
        if not np.isfinite(horizon) or horizon <= self.start:
            raise ValueError(f"horizon must exceed the start time {self.start}, got {horizon}")
        object.__setattr__(self, "horizon", horizon)
        if self.fast_path not in FAST_PATHS:
            raise ValueError(f"fast_path must be one of {FAST_PATHS}")

    @property
    def start(self):
        return 0.0 if self.pre_history is None else self.pre_history.t_end

    def past_times(self):
        if self.pre_history is None:
            return np.empty(0)
        return self.pre_history.all_times()


@dataclass(frozen=True)
class SimResult:
    """Simulated sequence plus bookkeeping.

    ``draws_made`` counts random variates; ``wall_time`` is in seconds and is
    the only field that differs between runs with the same seed.
    """

    seq: EventSequence
    draws_made: int
    wall_time: float
    method: str
    seed: object = None
    model: HawkesModel = None
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.seq)

    def metadata(self):
        seed = self.seed if isinstance(self.seed, (int, type(None))) else repr(self.seed)
        return {
            "method": self.method,
            "seed": seed,
            "model": None if self.model is None else self.model.to_dict(),
            "t_start": self.seq.t_start,
            "t_end": self.seq.t_end,
            "n_events": len(self.seq),
            "n_history": int(self.seq.history.size),
            "draws_made": int(self.draws_made),
            "wall_time": self.wall_time,
            **self.extra,
        }

    def save(self, csv_path):
        """Write the events CSV and a JSON metadata sidecar next to it."""
        csv_path = Path(csv_path)
        self.seq.to_csv(csv_path)
        sidecar = csv_path.with_suffix(".json")
        sidecar.write_text(json.dumps(self.metadata(), indent=2) + "\n", encoding="utf-8")
        return sidecar


def prune_candidates(times, now, kernel):
    """Indices of past events whose timers can still fire at ``now``.

    With a finite support ``s`` only events with ``now - T_j < s`` qualify;
    otherwise every event is a candidate.
    """
    times = np.asarray(times, dtype=float)
    support = kernel.support
    if not np.isfinite(support):
        return np.arange(times.size)
    return np.arange(np.searchsorted(times, now - support, side="right"), times.size)


class _Buffer:
    """Growable array of event times."""

    def __init__(self, initial):
        self.data = np.empty(max(64, 2 * initial.size))
        self.data[: initial.size] = initial
        self.n = initial.size

    def append(self, value):
        if self.n == self.data.size:
            self.data = np.concatenate([self.data, np.empty(self.data.size)])
        self.data[self.n] = value
        self.n += 1

    def view(self, lo=0):
        return self.data[lo : self.n]


def _finish(cfg, buf, n_past, parents, draws, started, method):
    past = buf.data[:n_past].copy()
    seq = EventSequence(
        buf.data[n_past : buf.n].copy(),
        t_start=cfg.start,
        t_end=cfg.horizon,
        parents=np.asarray(parents, dtype=np.int64),
        history=past,
    )
    return SimResult(
        seq=seq,
        draws_made=draws,
        wall_time=time.perf_counter() - started,
        method=method,
        seed=cfg.seed,
        model=cfg.model,
    )


def simulate(cfg):
    """Run the competing-hazards simulator.

    ``fast_path="auto"`` dispatches Gompertz kernels to
    :func:`simulate_min_stable`; everything else takes the generic loop.
    """
    use_fast = cfg.fast_path == "min_stable" or (
        cfg.fast_path == "auto" and isinstance(cfg.model.kernel, Gompertz)
    )
    if use_fast:
        return simulate_min_stable(cfg)

    started = time.perf_counter()
    rng = check_rng(cfg.seed)
    eta = cfg.model.eta
    kernel = cfg.model.kernel
    support = kernel.support if cfg.prune else np.inf
    past = cfg.past_times()
    buf = _Buffer(past)
    parents = []
    now = cfg.start
    draws = 0

    while True:
        wait = rng.exponential(1.0 / eta)
        parent = 0
        lo = 0
        if np.isfinite(support):
            lo = int(np.searchsorted(buf.view(), now - support, side="right"))
        if lo < buf.n:
            timers = kernel._sample_truncated(now - buf.view(lo), rng)
            k = int(np.argmin(timers))
            # strict: ties go to the lower index, the baseline first
            if timers[k] < wait:
                wait = timers[k]
                parent = lo + k + 1
        draws += 1 + buf.n - lo
        now = now + wait
        if now > cfg.horizon:
            break
        buf.append(now)
        parents.append(parent)

    return _finish(cfg, buf, past.size, parents, draws, started, "hazards")


def simulate_min_stable(cfg):
    """One-shot variant for exponential excitation (Gompertz waiting times).

    The minimum of Gompertz(alpha_j, beta) timers is Gompertz(sum alpha_j,
    beta), so each step needs one Gompertz and one exponential draw. The
    parent is then drawn with probability proportional to each source's
    hazard (baseline included) at the new event time.
    """
    kernel = cfg.model.kernel
    if not isinstance(kernel, Gompertz):
        raise UnsupportedKernelError(
            f"min-stable fast path needs a Gompertz kernel, got {kernel.family!r}"
        )
    started = time.perf_counter()
    rng = check_rng(cfg.seed)
    eta = cfg.model.eta
    alpha, beta = kernel.alpha, kernel.beta
    past = cfg.past_times()
    buf = _Buffer(past)
    parents = []
    now = cfg.start
    draws = 0
    # current total kernel hazard sum_j alpha exp(-beta (now - T_j))
    rate = float(np.sum(alpha * np.exp(-beta * (now - past)))) if past.size else 0.0

    while True:
        wait = rng.exponential(1.0 / eta)
        draws += 1
        if rate > 0:
            e = -np.log1p(-rng.random())
            draws += 1
            if e < rate / beta:
                wait = min(wait, -np.log1p(-beta * e / rate) / beta)
        now = now + wait
        if now > cfg.horizon:
            break
        rate = rate * np.exp(-beta * wait)
        parent = 0
        if rate > 0:
            draws += 1
            u = rng.random() * (eta + rate)
            if u >= eta:
                weights = alpha * np.exp(-beta * (now - buf.view()))
                k = int(np.searchsorted(np.cumsum(weights), u - eta, side="right"))
                parent = min(k, buf.n - 1) + 1
        buf.append(now)
        parents.append(parent)
        rate += alpha

    return _finish(cfg, buf, past.size, parents, draws, started, "min_stable")


def continue_from(history, model, extra_horizon, seed=None, *, fast_path="auto"):
    """Simulate ``extra_horizon`` time units past the end of ``history``.

    Historical events act as potential parents. The returned sequence holds
    only the new events; its ``history`` is the conditioning data and its
    parent indices point into ``concat(history, new events)``.
    """
    extra_horizon = float(extra_horizon)
    if not extra_horizon > 0:
        raise ValueError("extra_horizon must be positive")
    cfg = SimConfig(
        model=model,
        horizon=history.t_end + extra_horizon,
        seed=seed,
        pre_history=history,
        fast_path=fast_path,
    )
    return simulate(cfg)
