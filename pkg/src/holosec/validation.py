"""Self-checks of the model invariants, runnable from the command line."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from holosec.beamforming import design_beamformers, effective_channel
from holosec.channel import corrupt_csi, draw_small_scale, lattice_variances, spectral_model
from holosec.geometry import ArrayGeometry
from holosec.power import PaProblem, solve_sca


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


REFERENCE_GEOMETRIES = [(n, d) for n in (20, 10) for d in (0.125, 0.25, 0.5)]


def check_semi_unitary() -> Check:
    worst = 0.0
    for n, d in REFERENCE_GEOMETRIES:
        phi = spectral_model(ArrayGeometry(n, n, d)).basis
        worst = max(worst, float(np.abs(phi.conj().T @ phi - np.eye(phi.shape[1])).max()))
    return Check("semi_unitarity", worst < 1e-10, f"max |Phi^H Phi - I| = {worst:.2e}")


def check_variance_normalization() -> Check:
    worst = 0.0
    for n, d in REFERENCE_GEOMETRIES:
        worst = max(worst, abs(float(lattice_variances(ArrayGeometry(n, n, d)).sum()) - 0.5))
    return Check("variance_normalization", worst < 1e-6, f"max |sum sigma^2 - 1/2| = {worst:.2e}")


def check_zero_forcing(trials: int = 10, seed: int = 0) -> Check:
    alice = spectral_model(ArrayGeometry(20, 20, 0.25))
    bobs = [spectral_model(ArrayGeometry(10, 10, 0.25)) for _ in range(2)]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        gs = [draw_small_scale(rng, b.n_samples, alice.n_samples) for b in bobs]
        sol = design_beamformers(alice, bobs, gs)
        for i, (bm, g) in enumerate(zip(bobs, gs)):
            own = abs(np.vdot(sol.bob_combiners[i], effective_channel(bm, g, alice.sigma, sol.inner[i]))) ** 2
            for k in range(len(bobs)):
                if k != i:
                    leak = abs(np.vdot(sol.bob_combiners[i], effective_channel(bm, g, alice.sigma, sol.inner[k]))) ** 2
                    worst = max(worst, leak / own)
    return Check("zero_forcing", worst < 1e-16, f"max leakage ratio = {worst:.2e}")


def check_csi_variance(seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    g = draw_small_scale(rng, 100, 1000)
    g_hat = corrupt_csi(g, 0.2, rng)
    var = float(np.mean(np.abs(g_hat) ** 2))
    return Check("csi_unit_variance", abs(var - 1.0) < 0.01, f"empirical variance = {var:.4f}")


def check_sca_monotone(problems: int = 20, seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    worst_step = 0.0
    worst_budget = 0.0
    worst_ascent = 0.0
    for k in range(problems):
        B = (1, 2, 4)[k % 3]
        p = PaProblem(10 ** rng.uniform(-2, 2, B), 10 ** rng.uniform(-2, 2, (B, B)), 1.0, 2.0)
        sol = solve_sca(p)
        if len(sol.trace) > 1:
            worst_step = min(worst_step, float(np.min(np.diff(sol.trace))))
        worst_budget = max(worst_budget, abs(float(sol.alpha.sum() + sol.beta.sum()) - p.total_power))
        worst_ascent = min(worst_ascent, sol.min_secrecy - p.min_secrecy(*p.uniform()))
    ok = worst_step >= -1e-9 and worst_budget <= 1e-8 and worst_ascent >= -1e-6
    return Check(
        "sca_monotone",
        ok,
        f"min tau step {worst_step:.2e}, budget error {worst_budget:.2e}, ascent margin {worst_ascent:.2e}",
    )


def run_all() -> list[Check]:
    return [
        check_semi_unitary(),
        check_variance_normalization(),
        check_zero_forcing(),
        check_csi_variance(),
        check_sca_monotone(),
    ]
