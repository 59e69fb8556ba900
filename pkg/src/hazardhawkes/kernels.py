"""Waiting-time distributions attached to Hawkes excitation functions.

An excitation function ``h`` is read as the hazard of a (defective) waiting
time ``V``: ``H(t) = int_0^t h``, ``S(t) = exp(-H(t))`` and ``F = 1 - S``.
Whenever ``H(inf) < 1`` the law puts mass ``exp(-H(inf))`` on "never"; that
outcome is represented by ``NEVER`` (``+inf``) and is not an error.

All families invert ``H`` in closed form. Sampling is inversion: to draw
``V - a | V >= a`` a uniform ``U ~ Unif(F(a), 1)`` is mapped through the
quantile function, which in cumulative-hazard coordinates reads
``H(V) = H(a) - log(1 - u)`` with ``u ~ Unif(0, 1)``.

Omori inverse, from ``H(t) = (K/p) c^-p (1 - (1 + t/c)^-p)``::

    t = c * expm1(-log1p(-e / H(inf)) / p),   e = -log(1 - q) < H(inf)

which is the same as ``(c^-p - (p/K) e)^(-1/p) - c``.
"""

import abc
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np

from ._validation import _scalar_or_array, check_positive, check_rng, check_times

NEVER = np.inf

_REGISTRY = {}


def _register(cls):
    _REGISTRY[cls.family] = cls
    return cls


class WaitingDistribution(abc.ABC):
    """Base class: hazard, cumulative hazard, survival, CDF, quantile, sampling.

    Subclasses implement ``_hazard``, ``_cumhaz`` and ``_inv_cumhaz`` on float
    arrays and set ``family`` plus the ``total_mass`` / ``support`` values.
    Public methods accept scalars or arrays and return the same shape.
    """

    family: ClassVar[str] = ""
    _param_names: ClassVar[tuple] = ()

    @abc.abstractmethod
    def _hazard(self, t): ...

    @abc.abstractmethod
    def _cumhaz(self, t): ...

    @abc.abstractmethod
    def _inv_cumhaz(self, e):
        """Smallest ``t`` with ``H(t) = e``, for ``0 <= e < total_mass()``."""

    @abc.abstractmethod
    def total_mass(self):
        """Integrated hazard ``H(inf)``; the branching ratio of the kernel."""

    @property
    def support(self):
        """Upper end of the hazard's support (``inf`` when unbounded)."""
        return np.inf

    @property
    def nonincreasing(self):
        """Whether ``h`` is nonincreasing on ``[0, inf)``."""
        return True

    # public evaluators

    def hazard(self, t):
        return _scalar_or_array(self._hazard(check_times(t)))

    def cumulative_hazard(self, t):
        return _scalar_or_array(self._cumhaz(check_times(t)))

    def survival(self, t):
        return _scalar_or_array(np.exp(-self._cumhaz(check_times(t))))

    def cdf(self, t):
        return _scalar_or_array(-np.expm1(-self._cumhaz(check_times(t))))

    def limit_cdf(self):
        """``lim F(t)``; strictly below one for a defective law."""
        return float(-np.expm1(-self.total_mass()))

    def hazard_sup(self, t):
        """``sup_{s >= t} h(s)``, the left-endpoint bound used by thinning."""
        t = check_times(t)
        if self.nonincreasing:
            return _scalar_or_array(self._hazard(t))
        raise NotImplementedError

    def quantile(self, q):
        """Inverse CDF; returns ``NEVER`` for ``q >= limit_cdf()``."""
        q = np.asarray(q, dtype=float)
        if np.any(np.isnan(q)) or np.any(q < 0) or np.any(q >= 1):
            raise ValueError("probability must lie in [0, 1)")
        return _scalar_or_array(self._from_cumhaz(-np.log1p(-q)))

    def _from_cumhaz(self, e):
        e = np.asarray(e, dtype=float)
        out = np.full(e.shape, NEVER)
        ok = e < self.total_mass()
        if np.any(ok):
            out[ok] = self._inv_cumhaz(e[ok])
        return out

    def sample_truncated(self, a, rng):
        """Draw ``V - a`` given ``V >= a`` for each elapsed time in ``a``.

        One uniform is consumed per element of ``a``. Draws landing in the
        defective tail come back as ``NEVER``.
        """
        return _scalar_or_array(self._sample_truncated(check_times(a), rng))

    def _sample_truncated(self, a, rng):
        u = rng.random(a.shape)
        e = self._cumhaz(a) - np.log1p(-u)
        with np.errstate(all="ignore"):
            wait = self._inv_cumhaz(e) - a
        return np.where(e < self.total_mass(), np.maximum(wait, 0.0), NEVER)

    def sample(self, rng=None, size=None):
        """Unconditional inversion draws (may contain ``NEVER``)."""
        rng = check_rng(rng)
        return self.sample_truncated(np.zeros(() if size is None else size), rng)

    def sample_proper(self, rng=None, size=None):
        """Draws from the finite part of the law, CDF ``F(t) / F(inf)``."""
        rng = check_rng(rng)
        return _scalar_or_array(self._sample_proper(rng, () if size is None else size))

    def _sample_proper(self, rng, size):
        u = rng.random(size)
        return self._inv_cumhaz(np.asarray(-np.log1p(-u * self.limit_cdf())))

    def sample_offspring_delay(self, rng=None, size=None):
        """Draws with density ``h / H(inf)``, i.e. CDF ``H(t) / H(inf)``.

        This is the delay law of the children of one event in the branching
        representation, which differs from ``sample_proper`` unless the
        kernel mass is small.
        """
        rng = check_rng(rng)
        return _scalar_or_array(self._sample_offspring_delay(rng, () if size is None else size))

    def _sample_offspring_delay(self, rng, size):
        u = rng.random(size)
        return self._inv_cumhaz(np.asarray(u * self.total_mass()))

    # serialization

    def to_dict(self):
        out = {"family": self.family}
        for name in self._param_names:
            value = getattr(self, name)
            if isinstance(value, tuple):
                value = [float(v) for v in value]
            elif np.isinf(value):
                continue  # JSON has no infinity; absent means unbounded
            else:
                value = float(value)
            out[name] = value
        return out

    def params(self):
        return {k: v for k, v in self.to_dict().items() if k != "family"}


@_register
@dataclass(frozen=True)
class CensoredExponential(WaitingDistribution):
    """Constant excitation ``alpha`` switched off after ``kappa``.

    The waiting time is Exponential(alpha) censored at ``kappa``; draws past
    the censoring time never fire.
    """

    alpha: float
    kappa: float

    family: ClassVar[str] = "constant"
    _param_names: ClassVar[tuple] = ("alpha", "kappa")

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_positive(self.alpha, "alpha"))
        object.__setattr__(self, "kappa", check_positive(self.kappa, "kappa"))

    @property
    def support(self):
        return self.kappa

    def total_mass(self):
        return self.alpha * self.kappa

    def _hazard(self, t):
        return np.where(t <= self.kappa, self.alpha, 0.0)

    def _cumhaz(self, t):
        return self.alpha * np.minimum(t, self.kappa)

    def _inv_cumhaz(self, e):
        return e / self.alpha


@_register
@dataclass(frozen=True)
class Gompertz(WaitingDistribution):
    """Exponential excitation ``alpha * exp(-beta t)``.

    The waiting time is Gompertz with negative shape. ``H(inf) = alpha/beta``,
    so the law is defective without any censoring.
    """

    alpha: float
    beta: float

    family: ClassVar[str] = "exponential"
    _param_names: ClassVar[tuple] = ("alpha", "beta")

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_positive(self.alpha, "alpha"))
        object.__setattr__(self, "beta", check_positive(self.beta, "beta"))

    def total_mass(self):
        return self.alpha / self.beta

    def _hazard(self, t):
        return self.alpha * np.exp(-self.beta * t)

    def _cumhaz(self, t):
        return -(self.alpha / self.beta) * np.expm1(-self.beta * t)

    def _inv_cumhaz(self, e):
        return -np.log1p(-self.beta * e / self.alpha) / self.beta


@_register
@dataclass(frozen=True)
class Omori(WaitingDistribution):
    """Omori-law excitation ``K / (t + c)^(1 + p)``; stable iff ``K < p c^p``."""

    K: float
    c: float
    p: float

    family: ClassVar[str] = "omori"
    _param_names: ClassVar[tuple] = ("K", "c", "p")

    def __post_init__(self):
        for name in self._param_names:
            object.__setattr__(self, name, check_positive(getattr(self, name), name))

    def total_mass(self):
        # numpy power so extreme shapes give 0 or inf instead of raising
        with np.errstate(over="ignore", divide="ignore"):
            return float(self.K / (self.p * np.power(np.float64(self.c), self.p)))

    def _hazard(self, t):
        return self.K * (t + self.c) ** (-1.0 - self.p)

    def _cumhaz(self, t):
        # (K/p) c^-p (1 - (1 + t/c)^-p), written to avoid cancellation near 0
        return -self.total_mass() * np.expm1(-self.p * np.log1p(t / self.c))

    def _inv_cumhaz(self, e):
        return self.c * np.expm1(-np.log1p(-e / self.total_mass()) / self.p)


@_register
@dataclass(frozen=True)
class GevMinTruncated(WaitingDistribution):
    """Generalised extreme value law for minima, restricted to ``t > 0``.

    Hazard ``(1/sigma) / (1 - xi (t - mu)/sigma)^(1 + 1/xi)`` wherever the
    base is positive. Its integrated hazard diverges for every ``xi != 0``,
    so a finite censoring time ``kappa`` is needed to obtain a defective
    (stable) kernel; ``kappa = inf`` keeps the plain law.
    """

    mu: float
    sigma: float
    xi: float
    kappa: float = np.inf

    family: ClassVar[str] = "gev"
    _param_names: ClassVar[tuple] = ("mu", "sigma", "xi", "kappa")

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "sigma", check_positive(self.sigma, "sigma"))
        object.__setattr__(self, "xi", float(self.xi))
        object.__setattr__(self, "kappa", check_positive(self.kappa, "kappa", allow_inf=True))
        if not np.isfinite(self.mu) or not np.isfinite(self.xi) or self.xi == 0:
            raise ValueError("mu must be finite and xi finite and nonzero")
        if self.xi > 0 and self._edge <= 0:
            raise ValueError("support of the GEV-min law does not reach t > 0")
        object.__setattr__(self, "_h0", float(self._raw_cumhaz(np.float64(0.0))))

    @property
    def _edge(self):
        # base hits zero here: upper end for xi > 0, lower end for xi < 0
        return self.mu + self.sigma / self.xi

    def _base(self, t):
        return 1.0 - self.xi * (t - self.mu) / self.sigma

    def _raw_cumhaz(self, t):
        base = self._base(t)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            inside = np.where(base > 0, base, 1.0) ** (-1.0 / self.xi)
        outside = 0.0 if self.xi < 0 else np.inf
        return np.where(base > 0, inside, outside)

    @property
    def support(self):
        if self.xi > 0:
            return min(self.kappa, self._edge)
        return self.kappa

    @property
    def nonincreasing(self):
        # zero before a positive lower edge, so only monotone if the edge is not inside
        return self.xi <= -1 and self._edge <= 0

    def total_mass(self):
        if np.isinf(self.kappa):
            return np.inf
        return float(self._raw_cumhaz(np.float64(self.kappa)) - self._h0)

    def _hazard(self, t):
        base = self._base(t)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            h = np.where(base > 0, base, 1.0) ** (-1.0 - 1.0 / self.xi) / self.sigma
            h = np.where(base > 0, h, 0.0)
            if self.xi < -1:
                h = np.where(base == 0, np.inf, h)
        return np.where(t <= self.kappa, h, 0.0)

    def _cumhaz(self, t):
        return self._raw_cumhaz(np.minimum(t, self.kappa)) - self._h0

    def _inv_cumhaz(self, e):
        target = e + self._h0
        with np.errstate(divide="ignore"):
            base = target ** (-self.xi)
        return np.maximum(self.mu + self.sigma * (1.0 - base) / self.xi, 0.0)

    def hazard_sup(self, t):
        t = check_times(t)
        if self.xi <= -1:
            # nonincreasing past the lower edge; take the edge value in closed
            # form since base rounds to either side of zero there
            edge = self._edge
            at_edge = np.inf if self.xi < -1 else 1.0 / self.sigma
            at_edge = at_edge if edge <= self.kappa else 0.0
            with np.errstate(invalid="ignore"):
                out = np.where(t <= edge, at_edge, self._hazard(np.maximum(t, edge)))
            return _scalar_or_array(out)
        # increasing on its support: the supremum sits at the right end
        right = self.support
        if not np.isfinite(right) or (self.xi > 0 and right >= self._edge):
            peak = np.inf
        else:
            peak = float(self._hazard(np.float64(right)))
        return _scalar_or_array(np.where(t <= right, peak, 0.0))


@_register
@dataclass(frozen=True)
class PiecewiseConstantHazard(WaitingDistribution):
    """Histogram excitation: ``alphas[k]`` on ``[k delta, (k+1) delta)``.

    The waiting time is a composite (piecewise) exponential law. Inversion
    locates the bin by binary search over cumulative bin masses.
    """

    delta: float
    alphas: tuple

    family: ClassVar[str] = "piecewise"
    _param_names: ClassVar[tuple] = ("delta", "alphas")

    _rates: np.ndarray = field(init=False, repr=False, compare=False)
    _edges: np.ndarray = field(init=False, repr=False, compare=False)
    _suffix_max: np.ndarray = field(init=False, repr=False, compare=False)
    _grid: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "delta", check_positive(self.delta, "delta"))
        rates = np.asarray(self.alphas, dtype=float).ravel()
        if rates.size == 0 or not np.all(np.isfinite(rates)) or np.any(rates < 0):
            raise ValueError("alphas must be a non-empty list of non-negative rates")
        rates.setflags(write=False)
        object.__setattr__(self, "alphas", tuple(float(r) for r in rates))
        object.__setattr__(self, "_rates", rates)
        edges = np.concatenate([[0.0], self.delta * np.cumsum(rates)])
        edges.setflags(write=False)
        object.__setattr__(self, "_edges", edges)
        object.__setattr__(self, "_grid", self.delta * np.arange(rates.size + 1.0))
        object.__setattr__(
            self, "_suffix_max", np.maximum.accumulate(rates[::-1])[::-1].copy()
        )

    @property
    def n_bins(self):
        return self._rates.size

    @property
    def support(self):
        return self.n_bins * self.delta

    @property
    def nonincreasing(self):
        return bool(np.all(np.diff(self._rates) <= 0))

    def total_mass(self):
        return float(self._edges[-1])

    def _bin(self, t):
        with np.errstate(invalid="ignore"):
            k = np.floor(np.asarray(t) / self.delta)
        return np.where(np.isfinite(k), np.minimum(k, self.n_bins), self.n_bins).astype(np.intp)

    def _hazard(self, t):
        k = self._bin(t)
        inside = k < self.n_bins
        return np.where(inside, self._rates[np.minimum(k, self.n_bins - 1)], 0.0)

    def _cumhaz(self, t):
        # H is the linear interpolant of the bin-edge masses
        return np.interp(t, self._grid, self._edges)

    def _inv_cumhaz(self, e):
        if np.all(self._rates > 0):
            return np.interp(e, self._edges, self._grid)
        k = np.minimum(np.searchsorted(self._edges[1:], e, side="right"), self.n_bins - 1)
        return k * self.delta + (e - self._edges[k]) / self._rates[k]

    def hazard_sup(self, t):
        k = self._bin(check_times(t))
        inside = k < self.n_bins
        return _scalar_or_array(
            np.where(inside, self._suffix_max[np.minimum(k, self.n_bins - 1)], 0.0)
        )


FAMILIES = dict(_REGISTRY)


def kernel_from_dict(data):
    """Build a distribution from its JSON form, e.g. ``{"family": "omori", ...}``."""
    if not isinstance(data, dict) or "family" not in data:
        raise ValueError("kernel description must be a mapping with a 'family' key")
    family = str(data["family"]).lower()
    if family == "gompertz":
        family = "exponential"
    if family not in FAMILIES:
        raise ValueError(f"unknown kernel family {data['family']!r}")
    cls = FAMILIES[family]
    kwargs = {k: v for k, v in data.items() if k != "family"}
    unknown = set(kwargs) - set(cls._param_names)
    if unknown:
        raise ValueError(f"unexpected fields for {family}: {sorted(unknown)}")
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {family}: {exc}") from None
