"""Reference simulators: Ogata thinning and the cluster (branching) method.

Both are used to cross-check the competing-hazards simulator and as the
comparison methods of the benchmark.
"""

import time
from dataclasses import dataclass

import numpy as np

from ._validation import check_rng
from .exceptions import UnsupportedKernelError
from .model import EventSequence, HawkesModel
from .simulate import SimResult, _Buffer

BOUND_POLICIES = ("left_endpoint", "user")


@dataclass(frozen=True)
class ThinningConfig:
    """Thinning request on ``(0, horizon]``.

    ``bound_policy="left_endpoint"`` bounds the future intensity by
    ``eta + sum_j sup_{s >= t} h(s - T_j)``, which for nonincreasing hazards
    is the intensity at the current time. ``"user"`` takes ``hazard_bound``
    as a constant upper bound on ``h``.
    """

    model: HawkesModel
    horizon: float
    seed: object = None
    bound_policy: str = "left_endpoint"
    hazard_bound: float = None

    def __post_init__(self):
        if not isinstance(self.model, HawkesModel):
            raise TypeError("model must be a HawkesModel")
        object.__setattr__(self, "horizon", float(self.horizon))
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise ValueError("horizon must be positive and finite")
        if self.bound_policy not in BOUND_POLICIES:
            raise ValueError(f"bound_policy must be one of {BOUND_POLICIES}")
        if self.bound_policy == "user":
            if self.hazard_bound is None or not self.hazard_bound > 0:
                raise ValueError("user bound policy needs a positive hazard_bound")
        elif not np.isfinite(self.model.kernel.hazard_sup(0.0)):
            raise UnsupportedKernelError(
                f"{self.model.kernel.family} hazard is unbounded from the left "
                "endpoint; supply hazard_bound with bound_policy='user'"
            )


@dataclass(frozen=True)
class ClusterConfig:
    model: HawkesModel
    horizon: float
    seed: object = None

    def __post_init__(self):
        if not isinstance(self.model, HawkesModel):
            raise TypeError("model must be a HawkesModel")
        object.__setattr__(self, "horizon", float(self.horizon))
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise ValueError("horizon must be positive and finite")


def thinning_simulate(cfg):
    """Ogata's thinning; returns times only (no ancestry)."""
    started = time.perf_counter()
    rng = check_rng(cfg.seed)
    eta = cfg.model.eta
    kernel = cfg.model.kernel
    support = kernel.support
    reuse = cfg.bound_policy == "left_endpoint" and kernel.nonincreasing
    buf = _Buffer(np.empty(0))
    t = 0.0
    draws = 0
    proposals = 0
    bound = None

    while True:
        lo = 0
        if np.isfinite(support):
            lo = int(np.searchsorted(buf.view(), t - support, side="left"))
        if bound is None:
            if cfg.bound_policy == "user":
                bound = eta + (buf.n - lo) * cfg.hazard_bound
            else:
                bound = eta + float(np.sum(kernel.hazard_sup(t - buf.view(lo))))
        t += rng.exponential(1.0 / bound)
        draws += 2
        proposals += 1
        if t > cfg.horizon:
            break
        lam = eta + float(np.sum(kernel._hazard(t - buf.view(lo))))
        if lam > bound * (1 + 1e-9):
            raise RuntimeError(f"thinning bound violated: intensity {lam} > bound {bound}")
        accepted = rng.random() * bound <= lam
        if accepted:
            buf.append(t)
        if reuse:
            bound = lam + (kernel._hazard(np.float64(0.0)) if accepted else 0.0)
        else:
            bound = None

    seq = EventSequence(buf.view().copy(), t_start=0.0, t_end=cfg.horizon)
    return SimResult(
        seq=seq,
        draws_made=draws,
        wall_time=time.perf_counter() - started,
        method="thinning",
        seed=cfg.seed,
        model=cfg.model,
        extra={"proposals": proposals},
    )


def cluster_simulate(cfg):
    """Branching construction, one family tree at a time.

    Immigrants form a Poisson(eta) process on ``[0, horizon]``. Each event
    has Poisson(n*) children with i.i.d. delays of CDF ``H(t) / H(inf)``:
    the children of one event form a Poisson process with mean measure
    ``h(t) dt``, so given their count they are spread with density
    ``h / H(inf)``. This is not ``F(t) / F(inf)``, since ``f = h S`` weights
    early lags more heavily. Children after the horizon are dropped, which
    also removes their descendants; ancestors before 0 are not generated.
    """
    started = time.perf_counter()
    rng = check_rng(cfg.seed)
    eta = cfg.model.eta
    kernel = cfg.model.kernel
    nstar = kernel.total_mass()
    horizon = cfg.horizon

    n_immigrants = int(rng.poisson(eta * horizon))
    immigrants = rng.uniform(0.0, horizon, n_immigrants)
    draws = 1 + n_immigrants
    times = []
    origin = []  # internal id of the parent, -1 for immigrants

    for t0 in immigrants:
        stack = [len(times)]
        times.append(t0)
        origin.append(-1)
        while stack:
            node = stack.pop()
            k = int(rng.poisson(nstar))
            draws += 1 + k
            if not k:
                continue
            born = times[node] + kernel._sample_offspring_delay(rng, k)
            for child in born[born <= horizon]:
                stack.append(len(times))
                times.append(float(child))
                origin.append(node)

    times = np.asarray(times, dtype=float)
    origin = np.asarray(origin, dtype=np.int64)
    order = np.argsort(times, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    sorted_origin = origin[order]
    parents = np.where(sorted_origin < 0, 0, rank[np.maximum(sorted_origin, 0)] + 1)
    seq = EventSequence(times[order], t_start=0.0, t_end=horizon, parents=parents)
    return SimResult(
        seq=seq,
        draws_made=draws,
        wall_time=time.perf_counter() - started,
        method="cluster",
        seed=cfg.seed,
        model=cfg.model,
    )
