"""Shared generators and oracles for the test-suite."""

import math

import numpy as np
from hypothesis import strategies as st
from scipy import integrate

from hazardhawkes import (
    CensoredExponential,
    GevMinTruncated,
    Gompertz,
    Omori,
    PiecewiseConstantHazard,
)

FAMILY_NAMES = ("constant", "exponential", "omori", "gev", "piecewise")


def gev_with_mass(mu, sigma, xi, mass):
    """GEV-min kernel censored where its integrated hazard reaches ``mass``."""
    base = GevMinTruncated(mu, sigma, xi)
    kappa = float(base._inv_cumhaz(np.float64(mass)))
    return GevMinTruncated(mu, sigma, xi, kappa)


def kernel_with_mass(family, mass, shape):
    """Kernel of ``family`` with total mass ``mass``; ``shape`` in [0, 1)^4."""
    u = shape
    if family == "constant":
        alpha = 10 ** (-1 + 2 * u[0])
        return CensoredExponential(alpha, mass / alpha)
    if family == "exponential":
        beta = 10 ** (-1 + 2 * u[0])
        return Gompertz(mass * beta, beta)
    if family == "omori":
        c = 10 ** (-2 + 2.5 * u[0])
        p = 0.05 + 2.5 * u[1]
        return Omori(mass * p * c**p, c, p)
    if family == "gev":
        xi = (0.2 + 2.8 * u[0]) * (1 if u[1] < 0.5 else -1)
        sigma = 0.2 + 3 * u[2]
        mu = -1 + 3 * u[3]
        if xi > 0:
            mu = max(mu, 0.5 - sigma / xi)  # keep the upper edge well inside t > 0
        return gev_with_mass(mu, sigma, xi, mass)
    if family == "piecewise":
        n = 1 + int(5 * u[0])
        delta = 0.05 + 3 * u[1]
        weights = np.random.default_rng(int(1e6 * u[2])).dirichlet(np.ones(n))
        return PiecewiseConstantHazard(delta, tuple(mass * weights / delta))
    raise ValueError(family)


@st.composite
def stable_kernels(draw, families=FAMILY_NAMES, max_mass=0.999):
    family = draw(st.sampled_from(families))
    mass = draw(st.floats(0.01, max_mass))
    shape = [draw(st.floats(0.0, 0.999)) for _ in range(4)]
    return kernel_with_mass(family, mass, shape)


def random_stable_kernels(n, seed=0):
    """``n`` kernels cycling through all families with random shapes and masses."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        family = FAMILY_NAMES[i % len(FAMILY_NAMES)]
        mass = rng.uniform(0.0, 1.0)
        while mass == 0.0:
            mass = rng.uniform(0.0, 1.0)
        out.append(kernel_with_mass(family, mass, rng.uniform(0, 1, 4)))
    return out


def quad_cumhaz(kernel, t):
    """Integrated hazard by adaptive quadrature, split at known kinks."""
    points = [0.0]
    support = kernel.support
    if np.isfinite(support) and support < t:
        t_eff = support
    else:
        t_eff = t
    if isinstance(kernel, PiecewiseConstantHazard):
        points = list(np.arange(0, kernel.n_bins + 1) * kernel.delta)
    if isinstance(kernel, GevMinTruncated) and 0 < kernel._edge < t_eff:
        points.append(kernel._edge)
    points = sorted(p for p in set(points + [t_eff]) if 0 <= p <= t_eff)
    total = 0.0
    for a, b in zip(points[:-1], points[1:]):
        val, _ = integrate.quad(lambda s: float(kernel.hazard(s)), a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
        total += val
    return total


def bisect_quantile(kernel, q, tol=1e-14):
    """Quantile by bisection on the CDF (independent of any closed form)."""
    if q >= kernel.limit_cdf():
        return math.inf
    lo, hi = 0.0, 1.0
    while kernel.cdf(hi) < q:
        hi *= 2.0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if kernel.cdf(mid) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def null_band(n, alpha=0.05, level=0.99):
    """Central ``level`` range of the rejection rate when the null holds.

    Exact binomial quantiles of Binomial(n, alpha), as proportions.
    """
    from scipy.stats import binom

    tail = (1 - level) / 2
    return binom.ppf(tail, n, alpha) / n, binom.ppf(1 - tail, n, alpha) / n


def rejection_ok(rate, n, alpha=0.05, level=0.99):
    lo, hi = null_band(n, alpha, level)
    return lo <= rate <= hi
