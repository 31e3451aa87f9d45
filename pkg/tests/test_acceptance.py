"""Acceptance criteria, each checked at its stated tolerance.

Criteria 6 to 9 run full Monte Carlo studies (tens of minutes on one core).
"""

import dataclasses
import math

import numpy as np
import pytest

from holosec import cli
from holosec.beamforming import design_beamformers, effective_channel
from holosec.channel import draw_small_scale, lattice_variances, spectral_model
from holosec.experiments import ScenarioConfig, heatmap_config, run_heatmap, run_trials
from holosec.geometry import ArrayGeometry
from holosec.oracle import compare, random_problem
from holosec.power import solve_sca

from conftest import riemann_variances

GEOMS = [(n, d) for n in (20, 10) for d in (0.125, 0.25, 0.5)]


def test_c01_semi_unitarity(record):
    worst = 0.0
    for n, d in GEOMS:
        phi = spectral_model(ArrayGeometry(n, n, d)).basis
        worst = max(worst, float(np.abs(phi.conj().T @ phi - np.eye(phi.shape[1])).max()))
    assert record("C1 semi-unitarity", worst < 1e-10, f"max |Phi^H Phi - I| = {worst:.2e} (< 1e-10)")


def test_c02_variance_normalization(record):
    sum_err = cell_err = 0.0
    for n, d in GEOMS:
        g = ArrayGeometry(n, n, d)
        v = lattice_variances(g)
        sum_err = max(sum_err, abs(float(v.sum()) - 0.5))
        cell_err = max(cell_err, float(np.abs(v - riemann_variances(g)).max()))
    ok = sum_err < 1e-6 and cell_err < 1e-5
    assert record(
        "C2 variance normalization", ok,
        f"max |sum - 0.5| = {sum_err:.2e} (< 1e-6), max cell diff vs 2000x2000 Riemann = {cell_err:.2e} (< 1e-5)",
    )


def test_c03_zero_forcing(record):
    alice = spectral_model(ArrayGeometry(20, 20, 0.25))
    bob = spectral_model(ArrayGeometry(10, 10, 0.25))
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        gs = [draw_small_scale(rng, bob.n_samples, alice.n_samples) for _ in range(2)]
        sol = design_beamformers(alice, [bob, bob], gs)
        for b in range(2):
            own = abs(np.vdot(sol.bob_combiners[b], effective_channel(bob, gs[b], alice.sigma, sol.inner[b]))) ** 2
            leak = abs(np.vdot(sol.bob_combiners[b], effective_channel(bob, gs[b], alice.sigma, sol.inner[1 - b]))) ** 2
            worst = max(worst, leak / own)
    assert record("C3 zero-forcing", worst < 1e-16, f"worst leakage ratio over 100 trials = {worst:.2e} (< 1e-16)")


def test_c04_sca_monotone_feasible(record):
    rng = np.random.default_rng(44)
    bad_trace = bad_budget = bad_ascent = 0
    for k in range(100):
        prob = random_problem(rng, (1, 2, 4)[k % 3])
        sol = solve_sca(prob)
        if any(b < a - 1e-9 for a, b in zip(sol.trace, sol.trace[1:])):
            bad_trace += 1
        if abs(sol.alpha.sum() + sol.beta.sum() - prob.total_power) > 1e-8 or (sol.alpha < 0).any() or (sol.beta < 0).any():
            bad_budget += 1
        if sol.min_secrecy < prob.min_secrecy(*prob.uniform()) - 1e-6:
            bad_ascent += 1
    ok = bad_trace == bad_budget == bad_ascent == 0
    assert record(
        "C4 SCA monotone/feasible", ok,
        f"100 problems: trace violations {bad_trace}, budget violations {bad_budget}, ascent violations {bad_ascent}",
    )


def test_c05_oracle_gap(record):
    pairs = compare(50, seed=55, step=0.02)
    frac = float(np.mean([p.ratio_ok for p in pairs]))
    assert record("C5 oracle gap", frac >= 0.9, f"SCA >= 0.95 x grid optimum on {frac:.0%} of 50 problems (>= 90%)")


def _sum_secrecy(results, scheme, j=0):
    return np.array([r.sum_secrecy[scheme][j] for r in results])


def _mean_se(x):
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


@pytest.mark.slow
def test_c06_headline_levels(record):
    cfg = ScenarioConfig(spacing=0.125, xi=0.0, snr_db=(20.0,), trials=200, seed=6, pa="both")
    res = run_trials(cfg)
    prop, se_p = _mean_se(_sum_secrecy(res, "proposed"))
    fixed, se_f = _mean_se(_sum_secrecy(res, "fixed=0.5"))
    ratio = prop / fixed
    ok = prop > 50 and abs(fixed - 24) <= 5 and ratio > 2
    assert record(
        "C6 headline sum-secrecy levels", ok,
        f"proposed {prop:.2f}+/-{se_p:.2f} (> 50), fixed {fixed:.2f}+/-{se_f:.2f} (24 +/- 5), ratio {ratio:.2f} (> 2)",
    )


@pytest.mark.slow
def test_c07_eve_size_insensitivity(record):
    base = ScenarioConfig(xi=0.1, snr_db=(0.0, 10.0, 20.0), trials=200, seed=7, pa="proposed")
    means = {}
    for size in ((6, 6), (10, 10), (16, 16)):
        res = run_trials(dataclasses.replace(base, eve_size=size))
        means[size] = [float(_sum_secrecy(res, "proposed", j).mean()) for j in range(3)]
    spreads = []
    for j in range(3):
        v = np.array([means[s][j] for s in means])
        spreads.append(float((v.max() - v.min()) / v.mean()))
    ok = all(s < 0.10 for s in spreads)
    detail = "; ".join(
        f"{snr:g} dB: " + "/".join(f"{means[s][j]:.2f}" for s in means) + f" spread {spreads[j]:.1%}"
        for j, snr in enumerate(base.snr_db)
    )
    assert record("C7 Eve-size insensitivity", ok, detail + " (< 10%)")


@pytest.mark.slow
def test_c08_csi_robustness(record):
    base = ScenarioConfig(snr_db=(20.0,), trials=200, seed=8, pa="both")
    r0 = run_trials(dataclasses.replace(base, xi=0.0))
    r2 = run_trials(dataclasses.replace(base, xi=0.2))
    drop_p = _sum_secrecy(r0, "proposed") - _sum_secrecy(r2, "proposed")
    drop_f = _sum_secrecy(r0, "fixed=0.5") - _sum_secrecy(r2, "fixed=0.5")
    diff, se = _mean_se(drop_f - drop_p)
    ok = diff - 3 * se > 0
    assert record(
        "C8 CSI robustness", ok,
        f"drop fixed {drop_f.mean():.3f}, drop proposed {drop_p.mean():.3f}, "
        f"paired difference {diff:.3f} +/- {se:.3f} (need diff - 3 SE > 0)",
    )


@pytest.mark.slow
def test_c09_heatmap(record):
    cfg = heatmap_config(trials=50, seed=9)
    rows = run_heatmap(cfg, resolution=8)
    fixed = np.array([r.mean_sum_secrecy for r in rows if r.scheme == "fixed=0.5"])
    prop = np.array([r.mean_sum_secrecy for r in rows if r.scheme == "proposed"])
    ok = (
        fixed.size == prop.size == 64
        and np.all((fixed >= 6.2) & (fixed <= 9.1))
        and np.all((prop >= 30.6) & (prop <= 52.9))
        and np.all(prop > 4 * fixed)
    )
    assert record(
        "C9 Eve-location heat map", ok,
        f"fixed cells [{fixed.min():.2f}, {fixed.max():.2f}] (need [6.2, 9.1]), "
        f"proposed cells [{prop.min():.2f}, {prop.max():.2f}] (need [30.6, 52.9]), "
        f"proposed > 4x fixed in {int(np.sum(prop > 4 * fixed))}/{prop.size} cells (need all)",
    )


def test_c10_determinism(record, tmp_path):
    outputs = []
    for sub in ("snr-sweep", "csi-sweep", "spacing-sweep", "eve-sweep"):
        argv = [sub, "--seed", "7", "--trials", "2", "--snr", "0,20"]
        texts = []
        for run in ("a", "b"):
            out = tmp_path / run / sub
            assert cli.run([*argv, "--out", str(out)]) == 0
            texts.append((out / f"{sub.replace('-', '_')}.csv").read_bytes())
        outputs.append(texts[0] == texts[1])
    heat = []
    for run in ("a", "b"):
        out = tmp_path / run / "heat"
        assert cli.run(["heatmap", "--seed", "7", "--trials", "1", "--resolution", "2", "--out", str(out)]) == 0
        heat.append((out / "heatmap.csv").read_bytes())
    outputs.append(heat[0] == heat[1])
    assert record("C10 determinism", all(outputs), f"byte-identical CSV on rerun for {sum(outputs)}/{len(outputs)} subcommands")
