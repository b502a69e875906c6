import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import unity_minus_one
from unitclust.errors import BadSchedule, DegreeTooLargeForEnumeration
from unitclust.experiments import (
    SUMMARY_COLUMNS,
    ExperimentConfig,
    ExperimentResult,
    alpha_of,
    emit_report,
    exhaustive_expectation,
    monte_carlo_expectation,
    run_experiment,
    trial_jsonl,
)
from unitclust.rootfind import SolveOptions
from unitclust.samplers import CauchyScaled, Rademacher, SignedUniformInt


def unity_sampler(n, trial):
    return unity_minus_one(n)


def test_alpha_examples():
    assert alpha_of("log_squared", 1000) == pytest.approx(math.log(1000) ** 2)
    assert alpha_of("log_squared", 1000) == pytest.approx(47.71, abs=0.01)
    assert alpha_of("sqrt_height", 100, mean_height=1.0) == pytest.approx(10.0)
    assert alpha_of("sqrt_height", 100, mean_height=150.0) == 100
    assert alpha_of("fixed_rho", 50, rho=0.2) == pytest.approx(10.0)


@pytest.mark.parametrize("args", [("log_squared", 1), ("nope", 10), ("sqrt_height", 10), ("fixed_rho", 10)])
def test_alpha_errors(args):
    with pytest.raises(BadSchedule):
        alpha_of(*args)


@pytest.mark.parametrize("n", [2, 3, 10, 1000, 10**6])
def test_alpha_in_range(n):
    for sched, kw in [("log_squared", {}), ("sqrt_height", {"mean_height": math.log(n + 1)}),
                      ("fixed_rho", {"rho": 0.3})]:
        a = alpha_of(sched, n, **kw)
        assert 0 < a <= n


@pytest.mark.parametrize("schedule", ["log_squared", "sqrt_height", "fixed_rho"])
def test_unity_fixture_full_annulus(schedule):
    cfg = ExperimentConfig(degrees=(64,), trials=3, alpha_schedule=schedule, rho=0.2)
    res = run_experiment(cfg, sampler=unity_sampler)
    d = res.degrees[0]
    assert d.mean_nu_frac == 1.0 and d.mean_deficit == 0.0
    assert d.pass_rate == 1.0


@pytest.fixture(scope="module")
def small_run():
    cfg = ExperimentConfig(model=SignedUniformInt(), degrees=(40, 120), trials=12, seed=5, sector_grid=8)
    return run_experiment(cfg)


def test_sector_counts_partition(small_run):
    for t in small_run.trials:
        assert sum(t["sector_counts"]) == t["degree"]
        assert t["inner"] + t["annulus"] + t["outer"] == t["degree"]


def test_certified_bound_dominance(small_run):
    for d in small_run.degrees:
        assert d.mean_deficit <= d.certified_bound + 1e-9
        assert d.pass_rate == 1.0
    for t in small_run.trials:
        assert t["deficit"] <= t["trial_bound"] + 1e-9


def test_monotone_clustering(small_run):
    for d in small_run.degrees:
        assert all(b >= a for a, b in zip(d.annulus_curve, d.annulus_curve[1:]))


def test_markov_table(small_run):
    for d in small_run.degrees:
        for row in d.markov:
            assert row["empirical"] <= row["bound"] + 3 * row["se"]


def test_trial_records_ordered(small_run):
    keys = [(t["degree"], t["trial"]) for t in small_run.trials]
    assert keys == [(n, i) for n in (40, 120) for i in range(12)]


def test_reproducible_and_worker_independent():
    cfg = ExperimentConfig(model=CauchyScaled(), degrees=(30,), trials=6, seed=3)
    a = trial_jsonl(run_experiment(cfg))
    b = trial_jsonl(run_experiment(cfg))
    cfg2 = ExperimentConfig(model=CauchyScaled(), degrees=(30,), trials=6, seed=3, workers=2)
    c = trial_jsonl(run_experiment(cfg2))
    assert a == b == c


def test_unconverged_are_quarantined():
    cfg = ExperimentConfig(model=Rademacher(), degrees=(80,), trials=4,
                           solve=SolveOptions(max_iterations=1))
    res = run_experiment(cfg)
    d = res.degrees[0]
    assert d.unconverged == 4 and d.converged == 0
    assert res.failures == 4
    assert res.pass_rate == 1.0
    assert all("deficit" not in t for t in res.trials)


def test_config_round_trip():
    cfg = ExperimentConfig(model=CauchyScaled(), degrees=(10, 20), trials=2, alpha_schedule="fixed_rho", rho=0.3)
    again = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        ExperimentConfig(degrees=(1,))


# ------------------------------------------------------------------ enumeration


def enumerate_with_eigenvalues(n, rho, theta, phi):
    """Independent oracle: companion-matrix eigenvalues over all sign vectors."""
    tot_a = tot_s = 0
    for signs in itertools.product((1.0, -1.0), repeat=n + 1):
        r = np.roots(signs[::-1])
        m = np.abs(r)
        a = np.mod(np.angle(r), 2 * np.pi)
        tot_a += int(np.sum((m >= 1 - rho) & (m <= 1 / (1 - rho))))
        tot_s += int(np.sum((a >= theta) & (a < phi)))
    count = 2 ** (n + 1) * n
    return Fraction(tot_a, count), Fraction(tot_s, count)


def test_enumeration_n2():
    e = exhaustive_expectation(2, 0.9, 0.5, 2.5)
    assert e.samples == 8
    assert (e.annulus_fraction, e.sector_fraction) == enumerate_with_eigenvalues(2, 0.9, 0.5, 2.5)
    # every sign quadratic has both roots on |z| = 1 or at golden-ratio moduli, all inside [0.1, 10]
    assert e.annulus_fraction == 1


def test_enumeration_n8():
    full = exhaustive_expectation(8, 0.3, 0.0, 2 * math.pi)
    assert full.sector_fraction == 1 and full.samples == 512
    e = exhaustive_expectation(8, 0.1, 0.5, 2.5)
    assert (e.annulus_fraction, e.sector_fraction) == enumerate_with_eigenvalues(8, 0.1, 0.5, 2.5)


def test_enumeration_limit():
    with pytest.raises(DegreeTooLargeForEnumeration):
        exhaustive_expectation(13, 0.1, 0, 1)


def test_monte_carlo_small():
    mc = monte_carlo_expectation(Rademacher(), 4, 2000, 1, 0.2, 0.5, 2.5)
    ex = exhaustive_expectation(4, 0.2, 0.5, 2.5)
    assert abs(mc.annulus_fraction - float(ex.annulus_fraction)) < 4 * mc.annulus_se + 1e-12
    assert abs(mc.sector_fraction - float(ex.sector_fraction)) < 4 * mc.sector_se + 1e-12


# ------------------------------------------------------------------ reports


def test_empty_report(tmp_path):
    files = emit_report(ExperimentResult(None), tmp_path)
    assert (tmp_path / "summary.csv").read_text().strip() == ",".join(SUMMARY_COLUMNS)
    assert (tmp_path / "trials.jsonl").read_text() == ""
    assert "svg" not in files and not (tmp_path / "roots_sample.svg").exists()


def test_report_svg_marker_count(tmp_path):
    res = run_experiment(ExperimentConfig(model=Rademacher(), degrees=(64,), trials=1))
    files = emit_report(res, tmp_path)
    svg = files["svg"].read_text()
    assert svg.count('class="root"') == 64
    assert svg.count('class="annulus"') == 2
    lines = (tmp_path / "summary.csv").read_text().splitlines()
    assert len(lines) == 2
    for name in ("hist_modulus.csv", "hist_arg.csv", "markov.csv", "clustering_curve.csv"):
        assert (tmp_path / name).exists()


def test_arg_histogram_uniform(tmp_path):
    res = run_experiment(ExperimentConfig(model=Rademacher(), degrees=(1000,), trials=30, seed=2))
    emit_report(res, tmp_path)
    rows = (tmp_path / "hist_arg.csv").read_text().splitlines()[1:]
    masses = [float(r.split(",")[4]) for r in rows]
    assert len(masses) == 8
    assert all(abs(m - 1 / 8) < 0.05 for m in masses)
