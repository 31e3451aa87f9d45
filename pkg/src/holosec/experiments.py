"""Monte Carlo harness: SNR, CSI-error, spacing and Eve-size sweeps, and the Eve-location heat map.

Every trial draws its channels from a random stream keyed by ``(seed, trial)``,
so results do not depend on execution order and all schemes, SNR points and
sweep values see the same realizations.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from holosec.beamforming import design_beamformers, effective_channel
from holosec.channel import draw_realization, large_scale_gain, spectral_model
from holosec.geometry import ArrayGeometry, distance
from holosec.power import PaProblem, ScaOptions, fixed_pa, solve_sca
from holosec.secrecy import LinkGains, secrecy_report

CSV_VERSION = 1
CSV_COLUMNS = [
    "experiment",
    "scheme",
    "snr_db",
    "xi",
    "spacing",
    "n_eve",
    "eve_x",
    "eve_y",
    "trials",
    "mean_sum_secrecy",
    "se_sum_secrecy",
    "mean_min_secrecy",
    "se_min_secrecy",
]

DEFAULT_BOBS = ((40.0, -20.0, 0.0), (60.0, 30.0, 0.0))
HEATMAP_BOBS = ((40.0, -20.0, 0.0), (60.0, 30.0, 0.0), (40.0, 30.0, 0.0), (60.0, -20.0, 0.0))


class ConfigError(ValueError):
    """Invalid scenario configuration; the message names the offending key."""


@dataclass
class ScenarioConfig:
    """Scenario parameters. Positions are in meters; spacing in wavelengths."""

    alice_size: tuple[int, int] = (20, 20)
    alice_position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    bob_size: tuple[int, int] = (10, 10)
    bob_positions: tuple[tuple[float, float, float], ...] = DEFAULT_BOBS
    eve_size: tuple[int, int] = (10, 10)
    eve_position: tuple[float, float, float] = (60.0, 25.0, 0.0)
    spacing: float = 0.25
    path_loss_exponent: float = 2.7
    array_gain: float = 1000.0
    total_power: float = 2.0
    snr_db: tuple[float, ...] = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    xi: float = 0.0
    trials: int = 1000
    seed: int = 0
    pa: str = "both"

    def __post_init__(self) -> None:
        self.alice_size = _pair(self.alice_size, "alice_size")
        self.bob_size = _pair(self.bob_size, "bob_size")
        self.eve_size = _pair(self.eve_size, "eve_size")
        self.alice_position = _point(self.alice_position, "alice_position")
        self.eve_position = _point(self.eve_position, "eve_position")
        try:
            self.bob_positions = tuple(_point(p, "bob_positions") for p in self.bob_positions)
        except TypeError as exc:
            raise ConfigError(f"bob_positions must be a list of 3D points: {exc}") from None
        if not self.bob_positions:
            raise ConfigError("bob_positions must name at least one Bob")
        if not 0.0 < float(self.spacing) <= 0.5:
            raise ConfigError(f"spacing must lie in (0, 0.5] wavelengths, got {self.spacing!r}")
        if not 0.0 <= float(self.xi) <= 1.0:
            raise ConfigError(f"xi must lie in [0, 1], got {self.xi!r}")
        if not float(self.total_power) > 0.0:
            raise ConfigError(f"total_power must be positive, got {self.total_power!r}")
        if not float(self.array_gain) > 0.0:
            raise ConfigError(f"array_gain must be positive, got {self.array_gain!r}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed!r}")
        try:
            self.snr_db = tuple(float(s) for s in np.atleast_1d(self.snr_db))
        except (TypeError, ValueError):
            raise ConfigError(f"snr_db must be a list of numbers, got {self.snr_db!r}") from None
        if not self.snr_db:
            raise ConfigError("snr_db must contain at least one value")
        self.spacing = float(self.spacing)
        self.xi = float(self.xi)
        self.total_power = float(self.total_power)
        self.trials = int(self.trials)
        self.seed = int(self.seed)
        parse_schemes(self.pa)

    @property
    def n_bobs(self) -> int:
        return len(self.bob_positions)

    def geometries(self) -> tuple[ArrayGeometry, list[ArrayGeometry], ArrayGeometry]:
        d = self.spacing
        alice = ArrayGeometry(*self.alice_size, d, self.alice_position)
        bobs = [ArrayGeometry(*self.bob_size, d, p) for p in self.bob_positions]
        eve = ArrayGeometry(*self.eve_size, d, self.eve_position)
        return alice, bobs, eve

    def to_dict(self) -> dict:
        out = asdict(self)
        for k, v in out.items():
            if isinstance(v, tuple):
                out[k] = [list(x) if isinstance(x, tuple) else x for x in v]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")
        return cls(**data)


def heatmap_config(**overrides) -> ScenarioConfig:
    """Four-Bob defaults for the Eve-location map (P_T = 1 per user, -10 dB).

    Half-wavelength spacing is used because with four Bobs the quarter-wavelength
    default leaves no propagating null-space direction at Alice.
    """
    base = dict(
        bob_positions=HEATMAP_BOBS,
        total_power=4.0,
        snr_db=(-10.0,),
        spacing=0.5,
        trials=50,
    )
    base.update(overrides)
    return ScenarioConfig(**base)


def _pair(v, key) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in v)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a pair of positive integers, got {v!r}") from None
    if a < 1 or b < 1:
        raise ConfigError(f"{key} must be a pair of positive integers, got {v!r}")
    return a, b


def _point(v, key) -> tuple[float, float, float]:
    try:
        p = tuple(float(x) for x in v)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a 3D point, got {v!r}") from None
    if len(p) != 3:
        raise ConfigError(f"{key} must be a 3D point, got {v!r}")
    return p


def parse_schemes(pa: str) -> list[tuple[str, float | None]]:
    """``proposed`` | ``fixed=<frac>`` | ``both`` -> list of (name, fraction)."""
    pa = str(pa).strip()
    if pa == "proposed":
        return [("proposed", None)]
    if pa == "both":
        return [("proposed", None), ("fixed=0.5", 0.5)]
    if pa.startswith("fixed"):
        frac = 0.5
        if "=" in pa:
            try:
                frac = float(pa.split("=", 1)[1])
            except ValueError:
                raise ConfigError(f"pa: cannot parse fixed fraction in {pa!r}") from None
        if not 0.0 <= frac <= 1.0:
            raise ConfigError(f"pa: fixed fraction must lie in [0, 1], got {frac!r}")
        return [(f"fixed={frac:g}", frac)]
    raise ConfigError(f"pa must be 'proposed', 'fixed=<frac>' or 'both', got {pa!r}")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))


@dataclass
class TrialGains:
    """Noise-free gains of one trial.

    ``design_*`` are what Alice computes from her (possibly corrupted) CSI;
    ``true_*`` are the realized gains on the actual channels.
    """

    design_bob: np.ndarray
    design_eve: np.ndarray
    true_bob: np.ndarray
    true_eve: np.ndarray
    true_cross: np.ndarray
    ranks: list[int]

    def problem(self, noise: float, total_power: float) -> PaProblem:
        return PaProblem(self.design_bob / noise, self.design_eve, noise, total_power)

    def realized(self, noise: float) -> LinkGains:
        return LinkGains(self.true_bob / noise, self.true_eve, self.true_cross, noise)


class _Models:
    """Spectral models for one configuration; cheap to rebuild thanks to variance caching."""

    def __init__(self, config: ScenarioConfig):
        alice, bobs, eve = config.geometries()
        self.alice = spectral_model(alice)
        self.bobs = [spectral_model(g) for g in bobs]
        self.eve = spectral_model(eve)
        eta, lam = config.path_loss_exponent, config.array_gain
        self.zeta_bob = [large_scale_gain(distance(alice, g), eta, lam) for g in bobs]
        self.zeta_eve = large_scale_gain(distance(alice, eve), eta, lam)


def _gain_matrix(q: list[np.ndarray], rx_list, g_list, tx_sigma, inner, zeta) -> np.ndarray:
    B = len(inner)
    out = np.empty((len(q), B))
    for i, qi in enumerate(q):
        for k in range(B):
            h = effective_channel(rx_list[i], g_list[i], tx_sigma, inner[k])
            out[i, k] = abs(np.vdot(qi, h)) ** 2 * zeta[i]
    return out


def trial_gains(config: ScenarioConfig, trial: int, models: _Models | None = None) -> TrialGains:
    """Draw one trial's channels, design beams on Alice's knowledge, return gains."""
    m = models or _Models(config)
    rng = trial_rng(config.seed, trial)
    bob_ch = [draw_realization(rng, m.alice, bm, z, config.xi) for bm, z in zip(m.bobs, m.zeta_bob)]
    eve_ch = draw_realization(rng, m.alice, m.eve, m.zeta_eve, config.xi)

    design = design_beamformers(
        m.alice, m.bobs, [c.designer_g for c in bob_ch], m.eve, eve_ch.designer_g
    )
    B = config.n_bobs
    s_a = m.alice.sigma
    zb = m.zeta_bob
    design_full = _gain_matrix(design.bob_combiners, m.bobs, [c.designer_g for c in bob_ch], s_a, design.inner, zb)
    design_eve = _gain_matrix(design.eve_combiners, [m.eve] * B, [eve_ch.designer_g] * B, s_a, design.inner, [m.zeta_eve] * B)
    true_full = _gain_matrix(design.bob_combiners, m.bobs, [c.g for c in bob_ch], s_a, design.inner, zb)
    if config.xi == 0.0:
        true_eve = design_eve
    else:
        # Eve builds her combiners from her own exact effective channels.
        from holosec.beamforming import eve_combiner

        q_eve = [eve_combiner(m.eve, eve_ch.g, s_a, p) for p in design.inner]
        true_eve = _gain_matrix(q_eve, [m.eve] * B, [eve_ch.g] * B, s_a, design.inner, [m.zeta_eve] * B)
    cross = true_full.copy()
    np.fill_diagonal(cross, 0.0)
    return TrialGains(np.diag(design_full).copy(), design_eve, np.diag(true_full).copy(), true_eve, cross, design.ranks)


@dataclass
class TrialResult:
    """Per-scheme, per-SNR sum and min secrecy for one trial."""

    trial: int
    sum_secrecy: dict[str, np.ndarray]
    min_secrecy: dict[str, np.ndarray]
    alpha: dict[str, np.ndarray] = field(default_factory=dict)
    beta: dict[str, np.ndarray] = field(default_factory=dict)


def evaluate_trial(
    gains: TrialGains,
    config: ScenarioConfig,
    sca: ScaOptions | None = None,
    trial: int = 0,
) -> TrialResult:
    schemes = parse_schemes(config.pa)
    S = len(config.snr_db)
    B = gains.design_bob.size
    sums = {name: np.empty(S) for name, _ in schemes}
    mins = {name: np.empty(S) for name, _ in schemes}
    alphas = {name: np.empty((S, B)) for name, _ in schemes}
    betas = {name: np.empty((S, B)) for name, _ in schemes}
    for j, snr in enumerate(config.snr_db):
        noise = 10.0 ** (-snr / 10.0)
        problem = gains.problem(noise, config.total_power)
        realized = gains.realized(noise)
        for name, frac in schemes:
            sol = solve_sca(problem, sca) if frac is None else fixed_pa(problem, frac)
            rep = secrecy_report(realized, sol.alpha, sol.beta)
            sums[name][j] = rep.sum_secrecy
            mins[name][j] = rep.min_secrecy
            alphas[name][j] = sol.alpha
            betas[name][j] = sol.beta
    return TrialResult(trial, sums, mins, alphas, betas)


def run_trial(config: ScenarioConfig, trial: int, models: _Models | None = None) -> TrialResult:
    return evaluate_trial(trial_gains(config, trial, models), config, trial=trial)


def _worker_count() -> int:
    raw = os.environ.get("HOLO_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"HOLO_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def _run_chunk(args) -> list[TrialResult]:
    config, trials = args
    models = _Models(config)
    return [run_trial(config, t, models) for t in trials]


def run_trials(config: ScenarioConfig, workers: int | None = None) -> list[TrialResult]:
    """All trials of ``config``, ordered by trial index regardless of worker count."""
    workers = workers or _worker_count()
    idx = list(range(config.trials))
    if workers == 1 or config.trials == 1:
        return _run_chunk((config, idx))
    chunks = [(config, idx[k::workers]) for k in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, chunks))
    results = [r for part in parts for r in part]
    results.sort(key=lambda r: r.trial)
    return results


@dataclass
class AggregateRow:
    experiment: str
    scheme: str
    snr_db: float
    xi: float
    spacing: float
    n_eve: int
    eve_x: float
    eve_y: float
    trials: int
    mean_sum_secrecy: float
    se_sum_secrecy: float
    mean_min_secrecy: float
    se_min_secrecy: float


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    n = x.size
    mean = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, se


def aggregate(config: ScenarioConfig, results: Sequence[TrialResult], experiment: str) -> list[AggregateRow]:
    rows = []
    n_eve = config.eve_size[0] * config.eve_size[1]
    for name, _ in parse_schemes(config.pa):
        sums = np.array([r.sum_secrecy[name] for r in results])
        mins = np.array([r.min_secrecy[name] for r in results])
        for j, snr in enumerate(config.snr_db):
            ms, ss = _mean_se(sums[:, j])
            mm, sm = _mean_se(mins[:, j])
            rows.append(
                AggregateRow(
                    experiment, name, snr, config.xi, config.spacing, n_eve,
                    config.eve_position[0], config.eve_position[1], len(results), ms, ss, mm, sm,
                )
            )
    return rows


def run_snr_sweep(config: ScenarioConfig, workers: int | None = None) -> list[AggregateRow]:
    return aggregate(config, run_trials(config, workers), "snr")


def run_spacing_sweep(config: ScenarioConfig, spacings: Iterable[float], workers: int | None = None) -> list[AggregateRow]:
    """Element counts stay fixed while the spacing (hence the aperture) changes."""
    rows = []
    for d in spacings:
        cfg = replace(config, spacing=float(d))
        rows += aggregate(cfg, run_trials(cfg, workers), "spacing")
    return rows


def run_csi_sweep(config: ScenarioConfig, xis: Iterable[float], workers: int | None = None) -> list[AggregateRow]:
    rows = []
    for xi in xis:
        cfg = replace(config, xi=float(xi))
        rows += aggregate(cfg, run_trials(cfg, workers), "csi")
    return rows


def run_eve_sweep(config: ScenarioConfig, eve_sizes: Iterable[tuple[int, int]], workers: int | None = None) -> list[AggregateRow]:
    rows = []
    for size in eve_sizes:
        cfg = replace(config, eve_size=tuple(size))
        rows += aggregate(cfg, run_trials(cfg, workers), "eve")
    return rows


def heatmap_grid(x_range: tuple[float, float], y_range: tuple[float, float], resolution: int) -> list[tuple[float, float]]:
    xs = np.linspace(x_range[0], x_range[1], resolution)
    ys = np.linspace(y_range[0], y_range[1], resolution)
    return [(float(x), float(y)) for y in ys for x in xs]


def run_heatmap(
    config: ScenarioConfig,
    x_range: tuple[float, float] = (30.0, 70.0),
    y_range: tuple[float, float] = (-30.0, 40.0),
    resolution: int = 8,
    workers: int | None = None,
) -> list[AggregateRow]:
    """Sum secrecy per Eve position on a ``resolution x resolution`` grid in the z = 0 plane."""
    if resolution < 1:
        raise ConfigError(f"resolution must be positive, got {resolution!r}")
    rows = []
    for x, y in heatmap_grid(x_range, y_range, resolution):
        cfg = replace(config, eve_position=(x, y, 0.0))
        rows += aggregate(cfg, run_trials(cfg, workers), "heatmap")
    return rows


def rows_to_csv(rows: Sequence[AggregateRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in (getattr(r, c) for c in CSV_COLUMNS)])
    return buf.getvalue()


def config_to_json(config: ScenarioConfig) -> str:
    return json.dumps(config.to_dict(), indent=2, sort_keys=True)
