"""Likelihood, maximum-likelihood fitting and time-rescaling goodness of fit."""

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize

from ._validation import check_rng
from .exceptions import InsufficientDataError
from .kernels import (
    CensoredExponential,
    GevMinTruncated,
    Gompertz,
    Omori,
    PiecewiseConstantHazard,
)
from .model import EventSequence, HawkesModel, compensator, cumulative_excitation, excitation

# ---------------------------------------------------------------- likelihood


def log_likelihood(model, seq):
    """``sum_i log lambda(t_i) - Lambda(t_end)`` over the window events.

    History events raise the intensity inside the window but are not
    counted as observations.
    """
    return _loglik(model.eta, model.kernel, seq)


def _loglik(eta, kernel, seq, pairs=None):
    if pairs is None:
        lam = eta + excitation(kernel, seq.times, seq.all_times())
    else:
        lam = eta + pairs.excitation(kernel)
    if np.any(lam <= 0) or not np.all(np.isfinite(lam)):
        return -np.inf
    comp = compensator(eta, kernel, seq, seq.t_end)[0]
    return float(np.sum(np.log(lam)) - comp)


class _PairLags:
    """All positive lags ``t_i - s`` (``s`` earlier than ``t_i``), flattened.

    Fitting evaluates the kernel at the same lags hundreds of times; a flat
    array lets each evaluation run as a handful of vectorised passes.
    """

    max_pairs = 40_000_000

    def __init__(self, seq):
        self.n = len(seq)
        sources = seq.all_times()
        counts = np.searchsorted(sources, seq.times, side="left")
        self.lags = np.concatenate(
            [t - sources[:k] for t, k in zip(seq.times, counts)] or [np.empty(0)]
        )
        self.nonempty = np.flatnonzero(counts > 0)
        self.starts = np.concatenate([[0], np.cumsum(counts)[:-1]])[self.nonempty]
        self.times = seq.times
        self.sources = sources

    @classmethod
    def maybe(cls, seq, family):
        if family != "omori":
            return None  # recursions or support cuts already make these cheap
        n_hist = seq.history.size
        n = len(seq)
        if n * n_hist + n * (n - 1) // 2 > cls.max_pairs:
            return None
        return cls(seq)

    def _reduce(self, values):
        out = np.zeros(self.n)
        if self.nonempty.size:
            out[self.nonempty] = np.add.reduceat(values, self.starts)
        return out

    def excitation(self, kernel):
        powered = self.lags + kernel.c
        np.power(powered, -1.0 - kernel.p, out=powered)
        return kernel.K * self._reduce(powered)


# -------------------------------------------------------------- parametrisation


class _Family:
    """Maps an unconstrained vector to ``(eta, kernel)`` and back."""

    def __init__(self, name, **options):
        self.name = name
        self.options = options

    def build(self, x):
        eta = math.exp(x[0])
        rest = x[1:]
        if self.name == "exponential":
            kernel = Gompertz(*np.exp(rest))
        elif self.name == "omori":
            kernel = Omori(*np.exp(rest))
        elif self.name == "constant":
            kernel = CensoredExponential(*np.exp(rest))
        elif self.name == "piecewise":
            kernel = PiecewiseConstantHazard(self.options["delta"], tuple(np.exp(rest)))
        elif self.name == "gev":
            mu, log_sigma, xi, log_kappa = rest
            kernel = GevMinTruncated(mu, math.exp(log_sigma), xi, math.exp(log_kappa))
        else:
            raise ValueError(f"unknown family {self.name!r}")
        return eta, kernel

    def encode(self, eta, kernel):
        head = [math.log(eta)]
        if self.name == "gev":
            return np.array(head + [kernel.mu, math.log(kernel.sigma), kernel.xi, math.log(kernel.kappa)])
        if self.name == "piecewise":
            with np.errstate(divide="ignore"):
                logs = np.log(np.maximum(np.asarray(kernel.alphas), 1e-300))
            return np.concatenate([head, logs])
        return np.log([eta] + [getattr(kernel, k) for k in kernel._param_names])

    def default_start(self, seq):
        """Heuristic start: half the events from the baseline, n* = 0.5."""
        rate = max(len(seq), 1) / max(seq.duration, 1e-12)
        gap = 1.0 / rate
        eta = 0.5 * rate
        n0 = 0.5
        if self.name == "exponential":
            kernel = Gompertz(n0 * rate, rate)
        elif self.name == "omori":
            p, c = 0.5, gap
            kernel = Omori(n0 * p * c**p, c, p)
        elif self.name == "constant":
            kernel = CensoredExponential(n0 / (2 * gap), 2 * gap)
        elif self.name == "piecewise":
            n_bins = int(self.options.get("n_bins", 4))
            delta = self.options["delta"]
            kernel = PiecewiseConstantHazard(delta, (n0 / (delta * n_bins),) * n_bins)
        elif self.name == "gev":
            base = GevMinTruncated(0.0, gap, -2.0)
            kappa = float(base._inv_cumhaz(np.float64(n0)))
            kernel = GevMinTruncated(0.0, gap, -2.0, kappa)
        else:
            raise ValueError(f"unknown family {self.name!r}")
        return self.encode(eta, kernel)


FIT_FAMILIES = ("exponential", "omori", "constant", "piecewise", "gev")


# --------------------------------------------------------------------- fitting


@dataclass(frozen=True)
class FitResult:
    model: HawkesModel
    loglik: float
    iterations: int
    converged: bool
    family: str
    n_starts: int = 1
    evaluations: int = 0

    @property
    def branching_ratio(self):
        return self.model.branching_ratio

    def to_dict(self):
        return {
            "family": self.family,
            "model": self.model.to_dict(),
            "branching_ratio": self.branching_ratio,
            "loglik": self.loglik,
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "n_starts": int(self.n_starts),
            "evaluations": int(self.evaluations),
        }


def _objective(family, seq):
    pairs = _PairLags.maybe(seq, family.name)

    def negloglik(x):
        try:
            eta, kernel = family.build(x)
        except (ValueError, OverflowError, ZeroDivisionError):
            return np.inf
        if not kernel.total_mass() < 1.0:
            return np.inf
        value = -_loglik(eta, kernel, seq, pairs)
        return value if np.isfinite(value) else np.inf

    return negloglik



# Families whose hazard is ``A * g(t; theta)`` with the amplitude ``A`` first.
PROFILE_FAMILIES = ("exponential", "omori", "constant")
_STABILITY_MARGIN = 1e-9
# shapes whose unit-amplitude mass is below this would need an amplitude
# near float overflow (Omori drifting to its exponential limit)
_MIN_UNIT_MASS = 1e-250


def _profile_amplitudes(g, C, mass, n, T):
    """Exact maximiser of ``sum log(eta + A g_i) - eta T - A C`` for ``n* < 1``.

    At any optimum with ``eta > 0`` the scaling identity
    ``eta T + A C = n`` holds, so ``eta = (n - A C) / T`` and the objective
    becomes ``sum log(n / T + A (g_i - C / T)) - n``, concave in ``A``.
    When the stability cap ``A m < 1`` binds, ``eta`` solves its own
    first-order condition at the capped amplitude.
    """
    slope = g - C / T
    base = n / T
    cap = (1.0 - _STABILITY_MARGIN) / mass
    upper = cap if C <= 0 else min(cap, n / C)

    def score(a):
        return float(np.sum(slope / (base + a * slope)))

    if score(0.0) <= 0:
        return base, 0.0
    top = upper * (1.0 - 1e-12)
    if upper < cap or score(top) < 0:
        a = brentq(score, 0.0, top, xtol=1e-14, rtol=1e-15) if score(top) < 0 else top
        return (n - a * C) / T, a
    # amplitude pinned at the stability cap; solve for eta alone
    def eta_score(eta):
        return float(np.sum(1.0 / (eta + cap * g))) - T

    hi = base
    while eta_score(hi) > 0:
        hi *= 2.0
    lo = hi
    while eta_score(lo) < 0 and lo > 1e-300:
        lo *= 0.5
    if eta_score(lo) < 0:
        return lo, cap
    return brentq(eta_score, lo, hi, xtol=1e-300, rtol=1e-15), cap


def _profile_objective(family, seq):
    """Negative profile log-likelihood over the log kernel shape."""
    pairs = _PairLags.maybe(seq, family.name)
    cls = {"exponential": Gompertz, "omori": Omori, "constant": CensoredExponential}[family.name]
    n = len(seq)
    T = seq.duration
    sources = seq.all_times()

    def solve(x):
        try:
            unit = cls(1.0, *np.exp(x))
            mass = unit.total_mass()
            if not (np.isfinite(mass) and mass > _MIN_UNIT_MASS):
                return None
            with np.errstate(all="ignore"):
                g = pairs.excitation(unit) if pairs is not None else excitation(unit, seq.times, sources)
                C = cumulative_excitation(unit, np.array([seq.t_end]), sources)[0]
                if seq.history.size:
                    C -= np.sum(unit._cumhaz(seq.t_start - seq.history))
        except (ValueError, OverflowError, ZeroDivisionError):
            return None
        if not (np.all(np.isfinite(g)) and np.isfinite(C)):
            return None
        eta, a = _profile_amplitudes(g, C, mass, n, T)
        value = float(np.sum(np.log(eta + a * g)) - eta * T - a * C)
        return value, eta, a

    def negloglik(x):
        out = solve(x)
        if out is None or not np.isfinite(out[0]):
            return np.inf
        return -out[0]

    negloglik.solve = solve
    return negloglik

def fit_mle(
    seq,
    family="omori",
    init=None,
    *,
    n_starts=5,
    jitter=0.5,
    seed=0,
    max_polish=5,
    delta=None,
    n_bins=4,
):
    """Maximum-likelihood fit of a Hawkes model with the given kernel family.

    Nelder-Mead runs on log-transformed parameters (``mu`` and ``xi`` of the
    GEV family stay on their natural scale) from ``n_starts`` starting points:
    ``init`` (or a data-driven default) plus jittered copies. The best run
    is then restarted until the objective stops improving. Parameter values
    with ``n* >= 1`` are infeasible, so the returned model is always stable.

    For families whose hazard is an amplitude times a shape (exponential,
    omori, constant), ``eta`` and the amplitude are profiled out exactly for
    each shape, so the simplex only searches the shape parameters.

    Parameters
    ----------
    seq : EventSequence
        Observed events; history events, if any, condition the intensity.
    family : str
        One of ``"exponential"``, ``"omori"``, ``"constant"``,
        ``"piecewise"`` or ``"gev"``.
    init : HawkesModel, optional
        Starting model; its kernel must belong to ``family``.
    n_starts : int
        Number of starting points (init included).
    seed : int
        Seeds the jitter, making the fit deterministic.
    delta, n_bins :
        Bin width and count for the piecewise family (``delta`` defaults to
        the mean inter-event gap).
    """
    if not isinstance(seq, EventSequence):
        raise TypeError("seq must be an EventSequence")
    if len(seq) == 0:
        raise InsufficientDataError("cannot fit a model to an empty sequence")
    if family not in FIT_FAMILIES:
        raise ValueError(f"family must be one of {FIT_FAMILIES}")
    options = {}
    if family == "piecewise":
        if init is not None:
            delta, n_bins = init.kernel.delta, init.kernel.n_bins
        if delta is None:
            delta = seq.duration / len(seq)
        options = {"delta": float(delta), "n_bins": int(n_bins)}
    fam = _Family(family, **options)
    if init is not None:
        if init.kernel.family != family:
            raise ValueError(f"init kernel is {init.kernel.family!r}, expected {family!r}")
        x0 = fam.encode(init.eta, init.kernel)
    else:
        x0 = fam.default_start(seq)

    profiled = family in PROFILE_FAMILIES
    if profiled:
        # search the kernel shape only; eta and the amplitude are solved exactly
        f = _profile_objective(fam, seq)
        x0 = x0[2:]
    else:
        f = _objective(fam, seq)
    rng = check_rng(seed)
    starts = [x0] + [x0 + rng.normal(0.0, jitter, x0.size) for _ in range(max(n_starts, 1) - 1)]
    adaptive = x0.size > 4
    loose = {"xatol": 1e-3, "fatol": 1e-4, "maxiter": 200 * x0.size, "adaptive": adaptive}
    tight = {"xatol": 1e-8, "fatol": 1e-9, "maxiter": 2000 * x0.size, "adaptive": adaptive}

    iterations = evaluations = 0
    best = None
    for start in starts:
        if not np.isfinite(f(start)):
            continue
        res = minimize(f, start, method="Nelder-Mead", options=loose)
        iterations += res.nit
        evaluations += res.nfev
        if best is None or res.fun < best.fun:
            best = res
    if best is None or not np.isfinite(best.fun):
        raise RuntimeError("maximum-likelihood fit failed: no feasible starting point")

    converged = False
    for _ in range(max_polish):
        res = minimize(f, best.x, method="Nelder-Mead", options=tight)
        iterations += res.nit
        evaluations += res.nfev
        improved = best.fun - res.fun
        if res.fun <= best.fun:
            best = res
        if res.success and improved < 1e-9:
            converged = True
            break

    if profiled:
        _, eta, amplitude = f.solve(best.x)
        eta, kernel = fam.build(np.concatenate([[math.log(eta), math.log(max(amplitude, 1e-300))], best.x]))
        loglik = _loglik(eta, kernel, seq)
    else:
        eta, kernel = fam.build(best.x)
        loglik = -float(best.fun)
    return FitResult(
        model=HawkesModel(eta, kernel),
        loglik=loglik,
        iterations=int(iterations),
        converged=converged,
        family=family,
        n_starts=len(starts),
        evaluations=int(evaluations),
    )


# ------------------------------------------------------------ goodness of fit


def kolmogorov_sf(x, *, max_terms=100, tol=1e-10):
    """Survival function of the limiting Kolmogorov distribution.

    Uses the alternating series ``2 sum (-1)^(k-1) exp(-2 k^2 x^2)`` for
    ``x >= 1`` and the theta-function form of the CDF below that, where the
    alternating series converges slowly.
    """
    x = float(x)
    if x <= 0:
        return 1.0
    if x < 1.0:
        scale = math.pi**2 / (8.0 * x * x)
        total = 0.0
        for k in range(1, max_terms + 1):
            term = math.exp(-((2 * k - 1) ** 2) * scale)
            total += term
            if term < tol:
                break
        cdf = math.sqrt(2.0 * math.pi) / x * total
        return min(max(1.0 - cdf, 0.0), 1.0)
    total = 0.0
    for k in range(1, max_terms + 1):
        term = math.exp(-2.0 * k * k * x * x)
        total += term if k % 2 else -term
        if term < tol:
            break
    return min(max(2.0 * total, 0.0), 1.0)


def ks_exponential(sample):
    """One-sample KS statistic and asymptotic p-value against Exp(1)."""
    w = np.sort(np.asarray(sample, dtype=float))
    n = w.size
    cdf = -np.expm1(-w)
    i = np.arange(1, n + 1)
    d = max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n))
    return float(d), kolmogorov_sf(math.sqrt(n) * d)


@dataclass(frozen=True)
class GofResult:
    """Time-rescaling test outcome.

    ``rescaled_waits`` has one entry per event: increments of the
    compensator, the first measured from the window start.
    """

    ks_statistic: float
    p_value: float
    rescaled_waits: np.ndarray
    qq_pairs: np.ndarray

    def rejects(self, alpha=0.05):
        return self.p_value < alpha

    def to_dict(self):
        return {
            "ks_statistic": self.ks_statistic,
            "p_value": self.p_value,
            "n": int(self.rescaled_waits.size),
            "rescaled_waits": [float(w) for w in self.rescaled_waits],
            "qq_pairs": [[float(a), float(b)] for a, b in self.qq_pairs],
        }

    def qq_to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theoretical", "empirical"])
            writer.writerows([repr(float(a)), repr(float(b))] for a, b in self.qq_pairs)


def rescaled_times(model, seq):
    """Compensator values ``Lambda(t_i)`` at the window events."""
    return compensator(model.eta, model.kernel, seq, seq.times)


def time_rescale_test(model, seq):
    """Random time change test: compensator increments against Exp(1)."""
    if len(seq) < 2:
        raise InsufficientDataError("time-rescaling test needs at least two events")
    tau = rescaled_times(model, seq)
    waits = np.diff(np.concatenate([[0.0], tau]))
    d, p = ks_exponential(waits)
    n = waits.size
    theoretical = -np.log1p(-(np.arange(1, n + 1) - 0.5) / n)
    qq = np.column_stack([theoretical, np.sort(waits)])
    return GofResult(ks_statistic=d, p_value=p, rescaled_waits=waits, qq_pairs=qq)
