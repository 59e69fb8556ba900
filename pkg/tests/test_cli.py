import json
import math
import subprocess
import sys

import numpy as np
import pytest

from hazardhawkes import EventSequence, FIXTURE_MODEL, HawkesModel, Omori, PiecewiseConstantHazard, SimConfig, simulate
from hazardhawkes.cli import main
from hazardhawkes.datasets import FIXTURE_HORIZON, fixture_path, generate_fixture, load_fixture

EARTHQUAKE = HawkesModel(2.295, Omori(0.082, 0.145, 0.141))
ZERO_MODEL = HawkesModel(2.0, PiecewiseConstantHazard(1.0, (0.0,)))


def _write_model(path, model):
    path.write_text(json.dumps(model.to_dict()))
    return str(path)


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_is_deterministic(tmp_path, capsys):
    model = _write_model(tmp_path / "m.json", EARTHQUAKE)
    outs = []
    for name in ("a.csv", "b.csv"):
        code, out, _ = _run(capsys, "simulate", model, "--horizon", 20, "--seed", 5, "--out", tmp_path / name)
        assert code == 0
        outs.append(json.loads(out))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert outs[0] == outs[1]
    a = json.loads((tmp_path / "a.json").read_text())
    b = json.loads((tmp_path / "b.json").read_text())
    a.pop("wall_time"), b.pop("wall_time")
    assert a == b
    seq = EventSequence.from_csv(tmp_path / "a.csv", t_end=20.0)
    assert len(seq) == outs[0]["n_events"]
    assert np.array_equal(seq.times, simulate(SimConfig(EARTHQUAKE, 20.0, 5)).seq.times)


def test_simulate_zero_kernel_is_poisson(tmp_path, capsys):
    model = _write_model(tmp_path / "m.json", ZERO_MODEL)
    counts = []
    for seed in range(200):
        code, out, _ = _run(capsys, "simulate", model, "--horizon", 10, "--seed", seed)
        assert code == 0
        counts.append(json.loads(out)["n_events"])
    assert abs(np.mean(counts) - 20.0) < 3 * math.sqrt(20.0 / 200)


def test_simulate_unstable_model_exit_3(tmp_path, capsys):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"eta": 1.0, "kernel": {"family": "exponential", "alpha": 3.0, "beta": 2.0}}))
    code, _, err = _run(capsys, "simulate", path, "--horizon", 10)
    assert code == 3
    assert "1.5" in err


def test_simulate_validation_errors(tmp_path, capsys):
    model = _write_model(tmp_path / "m.json", EARTHQUAKE)
    assert _run(capsys, "simulate", model)[0] == 2  # no horizon
    assert _run(capsys, "simulate", tmp_path / "missing.json", "--horizon", 1)[0] == 2
    assert _run(capsys, "simulate", model, "--horizon", -1)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"eta": 1.0, "kernel": {"family": "weibull"}}')
    assert _run(capsys, "simulate", bad, "--horizon", 1)[0] == 2


@pytest.mark.parametrize("content", ["", "time\n", "when\n1\n", "time\n2\n1\n"])
def test_fit_bad_csv_exit_2(tmp_path, capsys, content):
    path = tmp_path / "e.csv"
    path.write_text(content)
    code, _, err = _run(capsys, "fit", path)
    assert code == 2
    assert err.startswith("error:")


def test_fit_fixture_recovers_branching_ratio(tmp_path, capsys):
    out = tmp_path / "fit.json"
    code, _, _ = _run(capsys, "fit", fixture_path(), "--t-end", FIXTURE_HORIZON, "--out", out)
    assert code == 0
    fit = json.loads(out.read_text())
    model = HawkesModel.from_dict(fit["model"])
    assert abs(model.branching_ratio - FIXTURE_MODEL.branching_ratio) < 0.1
    assert fit["converged"] is True
    # a second run is bit-for-bit identical
    again = tmp_path / "fit2.json"
    _run(capsys, "fit", fixture_path(), "--t-end", FIXTURE_HORIZON, "--out", again)
    assert out.read_bytes() == again.read_bytes()


def test_fixture_matches_generator():
    seq = load_fixture()
    fresh = generate_fixture()
    assert np.array_equal(seq.times, fresh.times)
    assert np.array_equal(seq.parents, fresh.parents)
    assert seq.t_end == FIXTURE_HORIZON


def test_gof_outputs(tmp_path, capsys):
    model = _write_model(tmp_path / "m.json", FIXTURE_MODEL)
    qq = tmp_path / "qq.csv"
    code, out, _ = _run(capsys, "gof", fixture_path(), model, "--qq-out", qq, "--t-end", FIXTURE_HORIZON)
    assert code == 0
    res = json.loads(out)
    n = len(load_fixture())
    rows = qq.read_text().splitlines()
    assert rows[0] == "theoretical,empirical"
    assert len(rows) == n + 1
    assert all(len(r.split(",")) == 2 for r in rows)
    assert np.allclose(np.loadtxt(qq, delimiter=",", skiprows=1)[:, 1], np.sort(res["rescaled_waits"]), rtol=0, atol=0)
    # the generating model is not rejected
    assert res["p_value"] > 0.05
    # the best homogeneous Poisson model is
    seq = load_fixture()
    poisson = _write_model(tmp_path / "p.json", HawkesModel(len(seq) / FIXTURE_HORIZON, PiecewiseConstantHazard(1.0, (0.0,))))
    code, out, _ = _run(capsys, "gof", fixture_path(), poisson, "--t-end", FIXTURE_HORIZON)
    assert json.loads(out)["p_value"] < 0.01


def test_gof_too_few_events(tmp_path, capsys):
    data = tmp_path / "e.csv"
    data.write_text("time\n1.0\n")
    model = _write_model(tmp_path / "m.json", FIXTURE_MODEL)
    assert _run(capsys, "gof", data, model)[0] == 2


def _history(tmp_path, model, days=7.0, seed=11):
    seq = simulate(SimConfig(model, days, seed)).seq
    path = tmp_path / "history.csv"
    EventSequence(seq.times, 0.0, days).to_csv(path)
    return path


def test_forecast_zero_kernel(tmp_path, capsys):
    data = _history(tmp_path, ZERO_MODEL)
    model = _write_model(tmp_path / "m.json", ZERO_MODEL)
    code, out, _ = _run(capsys, "forecast", data, model, "--horizon", 2, "--paths", 300, "--t-end", 7)
    assert code == 0
    res = json.loads(out)
    assert res["mean_background_fraction"] == 1.0
    assert res["pooled_background_fraction"] == 1.0
    hist = res["background_fraction_histogram"]
    assert hist["counts"][-1] == 300 - res["paths_without_events"]
    assert sum(res["count_histogram"]["counts"]) == 300


def test_forecast_single_path(tmp_path, capsys):
    data = _history(tmp_path, EARTHQUAKE)
    model = _write_model(tmp_path / "m.json", EARTHQUAKE)
    code, out, _ = _run(capsys, "forecast", data, model, "--horizon", 1, "--paths", 1, "--t-end", 7)
    assert code == 0
    res = json.loads(out)
    assert res["paths"] == 1
    assert sum(res["count_histogram"]["counts"]) == 1
    assert res["count_quantiles"]["0.5"] == res["mean_count"]


def _renewal_mean(model, history, T, dt=1e-3):
    """Expected count on (t_end, t_end + T] given history, by the renewal equation."""
    grid = np.arange(0, T, dt) + dt / 2
    h = model.kernel.hazard(grid)
    ages = history.t_end - history.all_times()
    pushed = np.array([np.sum(model.kernel.hazard(t + ages)) for t in grid])
    m = np.empty(grid.size)
    for i in range(grid.size):
        m[i] = model.eta + pushed[i] + dt * np.dot(h[:i][::-1], m[:i])
    return float(m.sum() * dt)


def test_forecast_background_fraction_earthquake_model(tmp_path, capsys):
    # a week of synthetic history, one day ahead; background events are
    # Poisson(eta * horizon), so the pooled fraction is eta * horizon / E[N]
    data = _history(tmp_path, EARTHQUAKE)
    model = _write_model(tmp_path / "m.json", EARTHQUAKE)
    out = tmp_path / "fc.json"
    code, _, _ = _run(capsys, "forecast", data, model, "--horizon", 1, "--seed", 4, "--t-end", 7, "--out", out)
    assert code == 0
    res = json.loads(out.read_text())
    paths = res["paths"]
    assert paths == 10000
    expected = _renewal_mean(EARTHQUAKE, EventSequence.from_csv(data, t_end=7.0), 1.0)
    values = np.repeat(res["count_histogram"]["values"], res["count_histogram"]["counts"])
    se = values.std(ddof=1) / math.sqrt(paths)
    assert abs(res["mean_count"] - expected) < 3 * se + 0.01 * expected
    background = res["pooled_background_fraction"] * values.sum() / paths
    assert abs(background - 2.295) < 3 * math.sqrt(2.295 / paths)
    assert res["pooled_background_fraction"] == pytest.approx(2.295 / expected, abs=0.02)
    assert 1 - EARTHQUAKE.branching_ratio < res["pooled_background_fraction"] < 1


def test_forecast_jobs_do_not_change_output(tmp_path, capsys):
    data = _history(tmp_path, EARTHQUAKE)
    model = _write_model(tmp_path / "m.json", EARTHQUAKE)
    args = ("forecast", data, model, "--horizon", 1, "--paths", 200, "--t-end", 7, "--seed", 9)
    one = _run(capsys, *args)[1]
    two = _run(capsys, *args, "--jobs", 2)[1]
    assert one == two


def test_forecast_validation(tmp_path, capsys):
    data = _history(tmp_path, EARTHQUAKE)
    model = _write_model(tmp_path / "m.json", EARTHQUAKE)
    assert _run(capsys, "forecast", data, model, "--paths", 0)[0] == 2
    assert _run(capsys, "forecast", data, model, "--horizon", 0)[0] == 2
    assert _run(capsys, "forecast", data, model, "--bins", 0)[0] == 2


def test_config_precedence(tmp_path, capsys):
    model = _write_model(tmp_path / "m.json", EARTHQUAKE)
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"seed": 1, "simulate": {"horizon": 5.0, "seed": 2}}))

    def meta(*extra):
        code, out, _ = _run(capsys, "--config", config, "simulate", model, *extra)
        assert code == 0
        return json.loads(out)

    assert meta()["seed"] == 2  # section beats top level
    assert meta()["t_end"] == 5.0
    assert meta("--seed", 3)["seed"] == 3  # flag beats config
    assert meta("--horizon", 7)["t_end"] == 7.0
    config.write_text(json.dumps({"seed": 1, "horizon": 4.0}))
    assert meta()["seed"] == 1
    code, out, _ = _run(capsys, "simulate", model, "--horizon", 5)
    assert json.loads(out)["seed"] == 0  # built-in default
    config.write_text(json.dumps({"simulate": {"colour": "red"}}))
    assert _run(capsys, "--config", config, "simulate", model)[0] == 2
    config.write_text("[1, 2]")
    assert _run(capsys, "--config", config, "simulate", model)[0] == 2
    assert _run(capsys, "--config", tmp_path / "none.json", "simulate", model)[0] == 2


def test_bench_small_grid(tmp_path, capsys):
    out, table = tmp_path / "bench.json", tmp_path / "table.txt"
    args = ["bench", "--grid", "exponential:0.5,discrete:0.9", "--reps", 4, "--target-points", 80, "--seed", 3]
    code, stdout, _ = _run(capsys, *args, "--out", out, "--table-out", table)
    assert code == 0
    report = json.loads(out.read_text())
    assert len(report["cells"]) == 6
    assert table.read_text().strip() == stdout.strip()
    code, stdout, _ = _run(capsys, *args)
    again = json.loads(stdout)
    for a, b in zip(report["cells"], again["cells"]):
        a.pop("runtime_us_per_point"), b.pop("runtime_us_per_point")
        assert a == b
    assert _run(capsys, "bench", "--grid", "weibull:0.5")[0] == 2
    assert _run(capsys, "bench", "--grid", "omori")[0] == 2
    assert _run(capsys, "bench", "--grid", "omori:1.5")[0] == 2


def test_help_and_entry_point():
    res = subprocess.run([sys.executable, "-m", "hazardhawkes.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for name in ("simulate", "fit", "gof", "forecast", "bench"):
        assert name in res.stdout
    res = subprocess.run([sys.executable, "-m", "hazardhawkes.cli", "forecast", "--help"], capture_output=True, text=True)
    assert "--paths" in res.stdout and "--horizon" in res.stdout
