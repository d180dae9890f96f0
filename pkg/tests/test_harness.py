import csv
import json
import os

import numpy as np
import pytest

from colorcode_rg.harness import (
    CSV_COLUMNS,
    FitResult,
    SweepConfig,
    convergence_report,
    curve_crossing,
    fit_threshold,
    pseudothreshold,
    read_sweep_csv,
    run_sweep,
    wilson_interval,
    write_convergence_csv,
    write_sweep_csv,
)


def test_sweep_config_validation():
    with pytest.raises(ValueError, match="trials"):
        SweepConfig(m_list=(1,), p_list=(0.1,), trials=0)
    with pytest.raises(ValueError, match="p values"):
        SweepConfig(m_list=(1,), p_list=(0.6,), trials=10)
    with pytest.raises(ValueError, match="p values"):
        SweepConfig(m_list=(1,), p_list=(0.0,), trials=10)
    with pytest.raises(ValueError, match="m_list"):
        SweepConfig(m_list=(), p_list=(0.1,), trials=10)


def test_wilson_interval_shrinks_like_inverse_sqrt():
    lo1, hi1 = wilson_interval(50, 1000)
    lo2, hi2 = wilson_interval(200, 4000)
    w1, w2 = hi1 - lo1, hi2 - lo2
    assert w2 < w1
    assert w1 / w2 == pytest.approx(2.0, rel=0.1)
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and hi > 0.0


def test_run_sweep_below_pseudothreshold(tmp_path):
    out = tmp_path / "sweep.csv"
    config = SweepConfig(m_list=(1,), p_list=(0.001,), trials=2000, seed=5,
                         out_csv=str(out), workers=1)
    result = run_sweep(config)
    pt = result.points[0]
    assert pt.n == 72 and pt.d == 6
    assert pt.p_L_avg < 0.001
    assert pt.fail_any <= pt.trials
    rows = read_sweep_csv(out)
    assert rows[0]["p_L_avg"] == pytest.approx(pt.p_L_avg)


def test_sweep_reproducible_and_worker_independent(tmp_path):
    base = dict(m_list=(1,), p_list=(0.05, 0.08), trials=600, seed=42)
    paths = []
    for i, workers in enumerate((1, 1, 2)):
        out = tmp_path / f"sweep{i}.csv"
        run_sweep(SweepConfig(**base, out_csv=str(out), workers=workers))
        paths.append(out)
    blobs = [p.read_bytes() for p in paths]
    assert blobs[0] == blobs[1]  # identical reruns
    assert blobs[0] == blobs[2]  # identical across worker counts


def test_csv_schema_and_manifest(tmp_path):
    out = tmp_path / "s.csv"
    man = tmp_path / "s.json"
    config = SweepConfig(m_list=(1,), p_list=(0.05,), trials=64, seed=1,
                         out_csv=str(out), out_manifest=str(man), workers=1)
    run_sweep(config)
    with open(out) as fh:
        header = fh.readline().strip().split(",")
    assert header == CSV_COLUMNS
    manifest = json.loads(man.read_text())
    assert manifest["config"]["seed"] == 1
    assert "created" in manifest

    with open(tmp_path / "bad.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "p"])
        writer.writerow([1, 0.1])
    with pytest.raises(ValueError, match="missing columns"):
        read_sweep_csv(tmp_path / "bad.csv")


def test_pseudothreshold_synthetic_cases():
    ps = np.linspace(0.02, 0.2, 10)
    # p_L = p^2 crosses the diagonal only at p = 1: no bracket in range
    with pytest.raises(ValueError, match="bracket"):
        pseudothreshold(ps, ps**2)
    # p_L = 2 p^2 crosses exactly at 0.5: rejected as a boundary case
    with pytest.raises(ValueError, match="bracket"):
        pseudothreshold(ps, 2 * ps**2)
    # synthetic curve with a known crossing at 0.06: p_L = p^2 / 0.06
    ps = np.array([0.04, 0.05, 0.055, 0.065, 0.07, 0.08])
    pls = ps**2 / 0.06
    star, lo, hi = pseudothreshold(ps, pls, pls * 0.9, pls * 1.1)
    assert star == pytest.approx(0.06, abs=1e-9)  # exact in log-log space
    assert lo < 0.06 < hi


def test_curve_crossing_synthetic():
    ps = np.array([0.04, 0.05, 0.06, 0.07, 0.08])
    a = 0.3 * ps            # shallow curve
    b = 2.5 * ps**1.8       # steep curve, crosses a where 2.5 p^0.8 = 0.3
    expected = (0.3 / 2.5) ** (1 / 0.8)
    got = curve_crossing(ps, b, a)
    assert got == pytest.approx(expected, rel=1e-9)
    assert curve_crossing(ps, a, 2 * a) is None


def test_fit_threshold_recovers_synthetic_parameters():
    Ls = np.array([6.0, 18.0, 54.0, 162.0])
    a, nu, t_inf = 0.1, 1.6, 0.060
    ts = a * Ls ** (-1 / nu) + t_inf
    fit = fit_threshold(Ls, ts)
    assert not fit.fixed_nu
    assert fit.t_inf == pytest.approx(t_inf, abs=1e-6)
    assert fit.nu == pytest.approx(nu, abs=1e-4)
    assert fit.a == pytest.approx(a, abs=1e-5)
    assert np.abs(fit.residuals).max() < 1e-9


def test_fit_threshold_two_points_uses_fixed_nu():
    Ls = [6.0, 18.0]
    ts = [0.1 * L ** (-1 / 1.6) + 0.06 for L in Ls]
    fit = fit_threshold(Ls, ts)
    assert fit.fixed_nu and fit.nu == 1.6
    assert fit.t_inf == pytest.approx(0.06, abs=1e-12)
    with pytest.raises(ValueError):
        fit_threshold([6.0], [0.1])


def test_convergence_report_trivial_cases(tmp_path):
    report = convergence_report(1, 1e-5, trials=40, seed=3, workers=1)
    assert report["trials"] == 40
    # with (almost) no errors every case converges immediately with no changes
    assert max(report["change_fraction"]) <= 1e-3
    assert report["cdf"][-1] == pytest.approx(1.0)
    out = tmp_path / "conv.csv"
    write_convergence_csv(report, out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "m,p,round,change_fraction,cdf"
    assert len(lines) == 1 + len(report["rounds"])


def test_fit_result_serialization():
    fit = FitResult(t_inf=0.06, nu=1.6, a=0.1, residuals=np.zeros(3))
    d = fit.to_dict()
    assert d["t_inf"] == 0.06 and not d["fixed_nu"]
