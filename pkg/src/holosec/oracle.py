"""Cross-check of the SCA allocation against exhaustive grid search."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from holosec.power import PaProblem, grid_search_oracle, solve_sca


@dataclass
class OraclePair:
    index: int
    sca_min_secrecy: float
    grid_min_secrecy: float

    @property
    def ratio_ok(self) -> bool:
        return self.sca_min_secrecy >= 0.95 * self.grid_min_secrecy


def random_problem(rng: np.random.Generator, n_users: int = 2, total_power: float = 2.0) -> PaProblem:
    """Gains log-uniform in [1e-2, 1e2], unit noise."""
    a = 10 ** rng.uniform(-2, 2, n_users)
    e = 10 ** rng.uniform(-2, 2, (n_users, n_users))
    return PaProblem(a, e, 1.0, total_power)


def compare(n_problems: int, seed: int = 0, step: float = 0.02) -> list[OraclePair]:
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n_problems):
        p = random_problem(rng)
        out.append(OraclePair(k, solve_sca(p).min_secrecy, grid_search_oracle(p, step).min_secrecy))
    return out


def dominance_fraction(pairs: list[OraclePair]) -> float:
    return float(np.mean([p.ratio_ok for p in pairs])) if pairs else 0.0
