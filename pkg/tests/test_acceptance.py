"""Acceptance criteria, each run at its stated tolerance.

Every test records PASS or FAIL with a short detail line in
``conftest.ACCEPTANCE``; the lines are printed at the end of the session.
"""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from hazardhawkes import (
    EventSequence,
    Gompertz,
    HawkesModel,
    Omori,
    PiecewiseConstantHazard,
    SimConfig,
    ThinningConfig,
    fit_mle,
    log_likelihood,
    run_bench,
    simulate,
    spawn_seeds,
    thinning_simulate,
    time_rescale_test,
)
from hazardhawkes.bench import METHODS, default_grid, run_cell

from .conftest import ACCEPTANCE
from .helpers import bisect_quantile, gev_with_mass, kernel_with_mass, null_band, random_stable_kernels

pytestmark = pytest.mark.acceptance

EARTHQUAKE = HawkesModel(2.295, Omori(0.082, 0.145, 0.141))
BENCH_SEED = 0
RECOVERY_SEED = 0


def record(key, passed, detail):
    ACCEPTANCE[key] = (bool(passed), detail)
    print(f"{'PASS' if passed else 'FAIL'} criterion {key}: {detail}")
    assert passed, detail


@pytest.fixture(scope="module")
def default_bench():
    grid = default_grid()
    return grid, run_bench(grid, master_seed=BENCH_SEED)


def test_01_rejection_rates(default_bench):
    _, report = default_bench
    lo, hi = null_band(200)
    bad = []
    rates = []
    for c in report.cells:
        rates.append(c.rejection_rate)
        if c.error is not None or not lo <= c.rejection_rate <= hi:
            bad.append(f"{c.family}:{c.norm:g}:{c.method}={c.rejection_rate} {c.error or ''}".strip())
    detail = f"27 cells, band [{lo:.3f}, {hi:.3f}], rates in [{min(rates):.3f}, {max(rates):.3f}]"
    if bad:
        detail += "; outside: " + ", ".join(bad)
    record("1 rejection rates", not bad, detail)


def test_02_runtime_ordering(default_bench):
    _, report = default_bench
    problems, parts = [], []
    for family in ("exponential", "omori", "discrete"):
        h, t, c = (report.cell(family, 0.9, m).runtime_us_per_point for m in METHODS)
        parts.append(f"{family} {h:.2f}/{t:.2f}/{c:.2f}")
        if not h <= t < c:
            problems.append(f"{family} ordering")
        if not c / h > 3:
            problems.append(f"{family} cluster/hazards={c / h:.2f}")
    detail = "us/point hazards/thinning/cluster at n*=0.9: " + "; ".join(parts)
    if problems:
        detail += "; violated: " + ", ".join(problems)
    record("2 runtime ordering", not problems, detail)


def test_03_earthquake_branching_ratio():
    mass = Omori(0.082, 0.145, 0.141).total_mass()
    record("3 omori mass", abs(mass - 0.76) <= 0.01, f"total mass {mass:.6f}, target 0.76 +- 0.01")


def test_04_defective_bound():
    bound = 1 - math.exp(-1) + 1e-12
    worst = max(k.limit_cdf() for k in random_stable_kernels(1000, seed=4))
    record("4 defective bound", worst <= bound, f"max F(inf) over 1000 kernels {worst:.15f} <= {bound:.15f}")


def test_05_gompertz_formulas():
    worst_q = worst_s = 0.0
    for alpha, beta in [(1.0, 2.0), (0.3, 0.7), (0.9, 5.0), (0.05, 0.1)]:
        k = Gompertz(alpha, beta)
        qs = np.linspace(0.0, k.limit_cdf(), 102)[1:-1]  # 100 interior probabilities
        for q in qs:
            t = float(k.quantile(q))
            worst_q = max(worst_q, abs(t - bisect_quantile(k, q)) / max(1.0, t))
        ts = np.linspace(0.0, 10.0 / beta, 100)
        for t in ts:
            val, _ = integrate.quad(lambda s: alpha * math.exp(-beta * s), 0.0, t, epsabs=1e-14, epsrel=1e-13)
            worst_s = max(worst_s, abs(float(k.survival(t)) - math.exp(-val)))
    ok = worst_q <= 1e-10 and worst_s <= 1e-10
    record("5 gompertz quantile/survival", ok, f"max quantile error {worst_q:.2e}, max survival error {worst_s:.2e}")


def _family_kernels():
    shape = np.array([0.4, 0.3, 0.5, 0.5])
    return {
        "constant": kernel_with_mass("constant", 0.5, shape),
        "exponential": Gompertz(1.0, 2.0),
        "omori": Omori(0.5, 1.0, 1.0),
        "gev": gev_with_mass(0.0, 1.0, -2.0, 0.5),
        "piecewise": PiecewiseConstantHazard(0.5, (0.3, 0.1, 0.15, 0.45)),
    }


def test_06_hazards_vs_thinning():
    horizon, reps = 50.0, 2000
    pvals = {}
    for family, kernel in _family_kernels().items():
        assert abs(kernel.total_mass() - 0.5) < 1e-9
        m = HawkesModel(2.0, kernel)
        a = [len(simulate(SimConfig(m, horizon, int(s)))) for s in spawn_seeds(61, reps)]
        b = [len(thinning_simulate(ThinningConfig(m, horizon, int(s)))) for s in spawn_seeds(62, reps)]
        pvals[family] = stats.ks_2samp(a, b).pvalue
    ok = all(p > 0.01 for p in pvals.values())
    record("6 hazards vs thinning", ok, "KS p: " + ", ".join(f"{f} {p:.3f}" for f, p in pvals.items()))


def test_07_mean_count():
    m = HawkesModel(2.0, Gompertz(1.0, 2.0))
    counts = np.array([len(simulate(SimConfig(m, 100.0, int(s)))) for s in spawn_seeds(71, 1000)])
    se = counts.std(ddof=1) / math.sqrt(counts.size)
    target = 2.0 * 100.0 / (1 - 0.5)
    ok = abs(counts.mean() - target) <= 3 * se
    record("7 mean count", ok, f"mean {counts.mean():.2f}, target {target:.0f}, 3 SE {3 * se:.2f}")


def test_08_parameter_recovery():
    sim = simulate(SimConfig(EARTHQUAKE, 1400.0, RECOVERY_SEED)).seq
    assert len(sim) >= 5000
    times = sim.times[:5000]
    seq = EventSequence(times, 0.0, times[-1])
    fit = fit_mle(seq, "omori", seed=RECOVERY_SEED)
    eta, nstar = fit.model.eta, fit.model.branching_ratio
    eta_ok = abs(eta - EARTHQUAKE.eta) <= 0.1 * EARTHQUAKE.eta
    n_ok = abs(nstar - EARTHQUAKE.branching_ratio) <= 0.1
    detail = (
        f"eta {eta:.3f} (true {EARTHQUAKE.eta}, +-10%), n* {nstar:.3f} "
        f"(true {EARTHQUAKE.branching_ratio:.3f}, +-0.1), "
        f"loglik fit - truth {fit.loglik - log_likelihood(EARTHQUAKE, seq):.2f}"
    )
    record("8 parameter recovery", eta_ok and n_ok, detail)


def test_09_determinism(default_bench):
    grid, report = default_bench
    m = EARTHQUAKE
    sims = [simulate(SimConfig(m, 50.0, 9)).seq for _ in range(2)]
    same_sim = np.array_equal(sims[0].times, sims[1].times) and np.array_equal(sims[0].parents, sims[1].parents)
    fits = [fit_mle(sims[0], "omori", seed=9).to_dict() for _ in range(2)]
    gofs = [time_rescale_test(m, sims[0]).to_dict() for _ in range(2)]
    # rerun one cell per method from the full report with its recorded seeds
    same_bench = True
    for method in METHODS:
        scenario = grid[4]
        old = report.cell(scenario.family, scenario.norm, method)
        new = run_cell(scenario, method, old.seeds)
        same_bench &= new.p_values == old.p_values and new.n_points == old.n_points
    ok = same_sim and fits[0] == fits[1] and gofs[0] == gofs[1] and same_bench
    detail = f"simulate {same_sim}, fit {fits[0] == fits[1]}, gof {gofs[0] == gofs[1]}, bench {same_bench}"
    record("9 determinism", ok, detail)
