"""Hawkes models built from a baseline rate and a waiting-time kernel."""

import csv
import json
from dataclasses import dataclass, field

import numba
import numpy as np

from ._validation import check_event_times, check_positive
from .exceptions import UnstableModelError
from .kernels import Gompertz, Omori, WaitingDistribution, kernel_from_dict

_CHUNK_ELEMENTS = 2_000_000


@dataclass(frozen=True)
class EventSequence:
    """Ordered event times observed on ``[t_start, t_end]``.

    ``history`` holds earlier events (at or before ``t_start``) that excite
    the process inside the window but are not part of it. ``parents`` uses
    1-based indices into ``concat(history, times)``; 0 marks a background
    event, so ``parents[i]`` lies in ``{0, ..., len(history) + i}``.
    """

    times: np.ndarray
    t_start: float = 0.0
    t_end: float = None
    parents: np.ndarray = None
    history: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        times = check_event_times(self.times)
        history = check_event_times(self.history, name="history")
        t_start = float(self.t_start)
        t_end = self.t_end
        if t_end is None:
            t_end = float(times[-1]) if times.size else t_start
        t_end = float(t_end)
        if not (np.isfinite(t_start) and np.isfinite(t_end)) or t_end < t_start:
            raise ValueError(f"invalid window ({t_start}, {t_end})")
        if times.size and (times[0] < t_start or times[-1] > t_end):
            raise ValueError("event times must lie inside the observation window")
        if history.size and history[-1] > t_start:
            raise ValueError("history events must not be later than t_start")
        if history.size and times.size and times[0] <= history[-1]:
            raise ValueError("events must be strictly later than the history")
        parents = self.parents
        if parents is not None:
            parents = np.asarray(parents)
            if parents.shape != times.shape:
                raise ValueError("parents must have one entry per event")
            if parents.size and not np.all(np.mod(parents, 1) == 0):
                raise ValueError("parents must be integers")
            parents = parents.astype(np.int64)
            limit = history.size + np.arange(times.size)
            if np.any(parents < 0) or np.any(parents > limit):
                raise ValueError("each parent must be 0 or an earlier event index")
            parents.setflags(write=False)
        times.setflags(write=False)
        history.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "history", history)
        object.__setattr__(self, "t_start", t_start)
        object.__setattr__(self, "t_end", t_end)
        object.__setattr__(self, "parents", parents)

    def __len__(self):
        return self.times.size

    @property
    def window(self):
        return (self.t_start, self.t_end)

    @property
    def duration(self):
        return self.t_end - self.t_start

    def all_times(self):
        """History and window events in one array."""
        return np.concatenate([self.history, self.times])

    def background_fraction(self):
        """Share of events whose parent is the baseline (``nan`` if empty)."""
        if self.parents is None:
            raise ValueError("sequence carries no ancestry")
        if not len(self):
            return float("nan")
        return float(np.mean(self.parents == 0))

    def shift(self, offset):
        return EventSequence(
            self.times + offset,
            self.t_start + offset,
            self.t_end + offset,
            self.parents,
            self.history + offset,
        )

    def to_csv(self, path):
        """Write ``time[,parent]`` rows; floats use shortest round-trip repr."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            if self.parents is None:
                writer.writerow(["time"])
                writer.writerows([repr(float(t))] for t in self.times)
            else:
                writer.writerow(["time", "parent"])
                writer.writerows(
                    [repr(float(t)), int(p)] for t, p in zip(self.times, self.parents)
                )

    @classmethod
    def from_csv(cls, path, *, t_start=0.0, t_end=None, history=None):
        """Read a ``time[,parent]`` CSV written by :meth:`to_csv`."""
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise ValueError(f"{path}: empty file")
            header = [h.strip().lower() for h in header]
            if header not in (["time"], ["time", "parent"]):
                raise ValueError(f"{path}: expected header 'time[,parent]', got {header}")
            rows = [row for row in reader if row]
        try:
            times = np.array([float(r[0]) for r in rows], dtype=float)
            parents = (
                np.array([int(r[1]) for r in rows], dtype=np.int64)
                if len(header) == 2
                else None
            )
        except (ValueError, IndexError) as exc:
            raise ValueError(f"{path}: malformed row ({exc})") from None
        return cls(
            times,
            t_start=t_start,
            t_end=t_end,
            parents=parents,
            history=np.empty(0) if history is None else history,
        )


def check_stable(obj):
    """Return the branching ratio, raising :class:`UnstableModelError` if >= 1.

    Accepts a :class:`HawkesModel` or a bare kernel.
    """
    kernel = obj.kernel if isinstance(obj, HawkesModel) else obj
    ratio = float(kernel.total_mass())
    if not ratio < 1.0:
        raise UnstableModelError(ratio)
    return ratio


@dataclass(frozen=True)
class HawkesModel:
    """Baseline rate ``eta`` plus an excitation kernel; stable by construction."""

    eta: float
    kernel: WaitingDistribution

    def __post_init__(self):
        object.__setattr__(self, "eta", check_positive(self.eta, "eta"))
        if not isinstance(self.kernel, WaitingDistribution):
            raise TypeError("kernel must be a WaitingDistribution")
        check_stable(self.kernel)

    @property
    def branching_ratio(self):
        return float(self.kernel.total_mass())

    @property
    def stationary_rate(self):
        """Mean event rate ``eta / (1 - n*)`` of the stationary process."""
        return self.eta / (1.0 - self.branching_ratio)

    def intensity(self, seq, t):
        """``eta + sum_{t_i < t} h(t - t_i)`` over history and window events."""
        t_arr = np.asarray(t, dtype=float)
        out = self.eta + excitation(self.kernel, t_arr.ravel(), seq.all_times())
        return float(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)

    def compensator(self, seq, t):
        """Integrated intensity from ``seq.t_start`` to ``t``."""
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < seq.t_start):
            raise ValueError("compensator is defined for t >= t_start")
        out = compensator(self.eta, self.kernel, seq, t_arr.ravel())
        return float(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)

    def to_dict(self):
        return {"eta": self.eta, "kernel": self.kernel.to_dict()}

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict) or "eta" not in data or "kernel" not in data:
            raise ValueError("model mapping needs 'eta' and 'kernel'")
        return cls(float(data["eta"]), kernel_from_dict(data["kernel"]))

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data)


def compensator(eta, kernel, seq, t):
    """``eta (t - t_start) + sum_{s < t} [H(t - s) - H(max(t_start - s, 0))]``.

    Works on raw ``(eta, kernel)`` so likelihood code can evaluate unstable
    parameter values without building a :class:`HawkesModel`.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    total = eta * (t - seq.t_start)
    total = total + cumulative_excitation(kernel, t, seq.all_times())
    if seq.history.size:
        total = total - np.sum(kernel._cumhaz(seq.t_start - seq.history))
    return total


def excitation(kernel, at, sources):
    """``sum_{s < t} h(t - s)`` for every ``t`` in ``at`` (sources sorted)."""
    at = np.asarray(at, dtype=float)
    sources = np.asarray(sources, dtype=float)
    if sources.size == 0 or at.size == 0:
        return np.zeros(at.shape)
    order = np.argsort(at, kind="stable")
    sorted_at = np.ascontiguousarray(at[order])
    if isinstance(kernel, Omori):
        vals = _omori_excitation(sorted_at, sources, kernel.K, kernel.c, kernel.p)
    elif isinstance(kernel, Gompertz):
        vals = _exp_excitation(sorted_at, sources, kernel.alpha, kernel.beta)
    else:
        vals = _pairwise_sum(kernel._hazard, sorted_at, sources, kernel.support, 0.0)
    out = np.empty_like(vals)
    out[order] = vals
    return out


def cumulative_excitation(kernel, at, sources):
    """``sum_{s < t} H(t - s)`` for every ``t`` in ``at`` (sources sorted)."""
    at = np.asarray(at, dtype=float)
    sources = np.asarray(sources, dtype=float)
    if sources.size == 0 or at.size == 0:
        return np.zeros(at.shape)
    order = np.argsort(at, kind="stable")
    vals = _pairwise_sum(
        kernel._cumhaz, at[order], sources, kernel.support, kernel.total_mass()
    )
    out = np.empty_like(vals)
    out[order] = vals
    return out


def _pairwise_sum(fn, at, sources, support, tail):
    """Sum ``fn(t - s)`` over sources ``s < t`` for sorted ``at``.

    Sources more than ``support`` before a target contribute the constant
    ``tail`` and are counted rather than evaluated.
    """
    out = np.zeros(at.size)
    hi_all = np.searchsorted(sources, at, side="left")
    if np.isfinite(support):
        lo_all = np.searchsorted(sources, at - support, side="left")
    else:
        lo_all = np.zeros(at.size, dtype=np.int64)
    n = at.size
    start = 0
    while start < n:
        lo = int(lo_all[start])
        rows = 1
        while (
            start + 2 * rows <= n
            and 2 * rows * (hi_all[start + 2 * rows - 1] - lo) <= _CHUNK_ELEMENTS
        ):
            rows *= 2
        stop = start + rows
        hi = int(hi_all[stop - 1])
        lags = at[start:stop, None] - sources[None, lo:hi]
        live = lags > 0
        vals = np.where(live, fn(np.where(live, lags, 0.0)), 0.0)
        out[start:stop] = vals.sum(axis=1)
        if lo and tail:
            out[start:stop] += tail * lo
        start = stop
    return out


@numba.njit(cache=True)
def _omori_excitation(at, sources, K, c, p):
    out = np.zeros(at.size)
    expo = -1.0 - p
    j = 0
    for i in range(at.size):
        t = at[i]
        while j < sources.size and sources[j] < t:
            j += 1
        acc = 0.0
        for k in range(j):
            acc += (t - sources[k] + c) ** expo
        out[i] = K * acc
    return out


@numba.njit(cache=True)
def _exp_excitation(at, sources, alpha, beta):
    # running sum of exp(-beta (t_now - s)) over absorbed sources
    out = np.zeros(at.size)
    acc = 0.0
    t_now = 0.0
    j = 0
    for i in range(at.size):
        t = at[i]
        while j < sources.size and sources[j] < t:
            if j > 0:
                acc *= np.exp(-beta * (sources[j] - t_now))
            acc += 1.0
            t_now = sources[j]
            j += 1
        if j > 0:
            out[i] = alpha * acc * np.exp(-beta * (t - t_now))
    return out
