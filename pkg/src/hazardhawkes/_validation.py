"""Input validation helpers shared by the public API."""

import numbers

import numpy as np


def check_rng(seed):
    """Turn ``seed`` into a :class:`numpy.random.Generator`.

    ``None`` gives fresh OS entropy, an int or :class:`~numpy.random.SeedSequence`
    seeds a new PCG64 generator, and an existing generator is passed through.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, (numbers.Integral, np.random.SeedSequence)):
        return np.random.default_rng(seed)
    raise TypeError(f"cannot build a random generator from {seed!r}")


def check_positive(value, name, *, allow_inf=False):
    value = float(value)
    if not (value > 0) or (np.isinf(value) and not allow_inf) or np.isnan(value):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return value


def check_times(t, name="t"):
    """Validate non-negative time arguments; ``+inf`` is allowed."""
    arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise ValueError(f"{name} must be >= 0")
    return arr


def check_event_times(times, *, name="times"):
    """Return event times as a 1-D float array, strictly increasing and finite."""
    arr = np.asarray(times, dtype=float)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if arr.size > 1 and np.any(np.diff(arr) <= 0):
        raise ValueError(f"{name} must be strictly increasing")
    return arr


def _scalar_or_array(out):
    """Return a Python float for 0-d results, arrays otherwise."""
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out
