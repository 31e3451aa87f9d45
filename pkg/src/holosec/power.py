"""Max-min secrecy power allocation between information symbols and artificial noise.

The min-secrecy objective is lifted into epigraph form with auxiliary variables
per user ``b``:

* ``C_b``  upper bound on Eve's rate for stream ``b``
* ``I_b``  lower bound on Eve's interference-plus-noise power
* ``X_b, Y_b, Z_b``  log-domain surrogates for ``alpha_b``, ``I_b`` and Eve's SINR

Two constraints are non-convex (``alpha_b <= exp(X_b)`` and
``2**C_b - 1 >= exp(Z_b)``); they are replaced by first-order expansions around
the previous iterate and the resulting convex program is solved by a barrier
method. Repeating this gives an ascent sequence in ``tau``.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from holosec.barrier import LOG2, NEG_EXP, BarrierOptions, ConvexProgram, Infeasible, solve_barrier
from holosec.secrecy import LinkGains, secrecy_gaps, secrecy_report

_LN2 = math.log(2.0)
ALPHA_FLOOR = 1e-12
CLIP_BELOW = 1e-9


class NonMonotone(RuntimeError):
    """The SCA objective went down; the inner solver returned a bad point."""


@dataclass
class PaProblem:
    """Scalar inputs of the power-allocation problem.

    ``a[b]`` already includes the division by the noise power, so Bob's rate is
    ``log2(1 + a[b] * alpha[b])``. ``e[b, k]`` is Eve's gain on stream ``k``
    when she targets user ``b``.
    """

    a: np.ndarray
    e: np.ndarray
    noise: float
    total_power: float

    def __post_init__(self) -> None:
        self.a = np.atleast_1d(np.asarray(self.a, dtype=float))
        self.e = np.atleast_2d(np.asarray(self.e, dtype=float))
        B = self.a.size
        if B < 1:
            raise ValueError("need at least one user")
        if self.e.shape != (B, B):
            raise ValueError(f"Eve gain matrix has shape {self.e.shape}, expected {(B, B)}")
        if np.any(self.a < 0) or np.any(self.e < 0):
            raise ValueError("gains must be nonnegative")
        if not self.total_power > 0:
            raise ValueError(f"total_power must be positive, got {self.total_power!r}")
        if not self.noise > 0:
            raise ValueError(f"noise must be positive, got {self.noise!r}")

    @property
    def n_users(self) -> int:
        return self.a.size

    def gains(self) -> LinkGains:
        return LinkGains.perfect(self.a, self.e, self.noise)

    def min_secrecy(self, alpha, beta) -> float:
        return secrecy_report(self.gains(), alpha, beta).min_secrecy

    def uniform(self) -> tuple[np.ndarray, np.ndarray]:
        p = np.full(self.n_users, self.total_power / (2 * self.n_users))
        return p, p.copy()


@dataclass
class PaIterate:
    alpha: np.ndarray
    beta: np.ndarray
    tau: float
    C: np.ndarray
    I: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    x_lin: np.ndarray
    c_lin: np.ndarray
    kkt_residual: float = 0.0
    min_slack: float = 0.0


@dataclass
class PaSolution:
    alpha: np.ndarray
    beta: np.ndarray
    tau: float
    secrecy: np.ndarray
    trace: list[float] = field(default_factory=list)
    converged: bool = True
    iterations: int = 0
    residuals: list[float] = field(default_factory=list)

    @property
    def min_secrecy(self) -> float:
        return float(self.secrecy.min())

    @property
    def sum_secrecy(self) -> float:
        return float(self.secrecy.sum())


@dataclass
class ScaOptions:
    tol: float = 1e-4
    max_iter: int = 50
    monotone_slack: float = 1e-9
    barrier: BarrierOptions = field(default_factory=BarrierOptions)


class _Layout:
    """Variable indices; users whose own Eve gain is zero carry no auxiliaries."""

    def __init__(self, problem: PaProblem):
        B = problem.n_users
        self.B = B
        self.active = np.flatnonzero(np.diag(problem.e) > 0.0)
        self.alpha = np.arange(B)
        self.beta = B + np.arange(B)
        nxt = 2 * B
        k = self.active.size
        self.C, self.I, self.X, self.Y, self.Z = (nxt + j * k + np.arange(k) for j in range(5))
        self.tau = nxt + 5 * k
        self.size = self.tau + 1


def _pack(lay: _Layout, it: PaIterate) -> np.ndarray:
    x = np.empty(lay.size)
    x[lay.alpha] = it.alpha
    x[lay.beta] = it.beta
    act = lay.active
    x[lay.C] = it.C[act]
    x[lay.I] = it.I[act]
    x[lay.X] = it.X[act]
    x[lay.Y] = it.Y[act]
    x[lay.Z] = it.Z[act]
    x[lay.tau] = it.tau
    return x


def _unpack(lay: _Layout, x: np.ndarray, x_lin: np.ndarray, c_lin: np.ndarray) -> PaIterate:
    B = lay.B
    act = lay.active
    full = {}
    for name in ("C", "I", "X", "Y", "Z"):
        v = np.zeros(B) if name == "C" else np.full(B, np.nan)
        v[act] = x[getattr(lay, name)]
        full[name] = v
    return PaIterate(
        alpha=x[lay.alpha].copy(),
        beta=x[lay.beta].copy(),
        tau=float(x[lay.tau]),
        x_lin=x_lin.copy(),
        c_lin=c_lin.copy(),
        **full,
    )


def build_program(problem: PaProblem, x_lin: np.ndarray, c_lin: np.ndarray) -> tuple[ConvexProgram, _Layout]:
    """Convex subproblem linearized at ``X_b = x_lin[b]``, ``C_b = c_lin[b]``."""
    lay = _Layout(problem)
    B, n = lay.B, lay.size
    e = problem.e
    rows_G: list[np.ndarray] = []
    rows_h: list[float] = []
    nl_row: list[int] = []
    nl_col: list[int] = []
    nl_kind: list[int] = []
    nl_scale: list[float] = []

    def row() -> np.ndarray:
        r = np.zeros(n)
        rows_G.append(r)
        return r

    floor = ALPHA_FLOOR * problem.total_power
    for b in range(B):
        row()[lay.alpha[b]] = 1.0
        rows_h.append(-floor)
        row()[lay.beta[b]] = 1.0
        rows_h.append(-floor)

    pos = {int(b): j for j, b in enumerate(lay.active)}
    for b in range(B):
        # log2(1 + a_b alpha_b) - C_b - tau >= 0
        r = row()
        r[lay.tau] = -1.0
        if b in pos:
            r[lay.C[pos[b]]] = -1.0
        rows_h.append(0.0)
        if problem.a[b] > 0.0:
            nl_row.append(len(rows_G) - 1)
            nl_col.append(lay.alpha[b])
            nl_kind.append(LOG2)
            nl_scale.append(problem.a[b])

    for b, j in pos.items():
        # Z_b - X_b + Y_b - ln e_bb >= 0  (log of exp(Z) >= e_bb exp(X - Y))
        r = row()
        r[lay.Z[j]], r[lay.X[j]], r[lay.Y[j]] = 1.0, -1.0, 1.0
        rows_h.append(-math.log(e[b, b]))
        # Eve interference plus noise >= I_b
        r = row()
        for k in range(B):
            if k != b:
                r[lay.alpha[k]] = e[b, k]
            r[lay.beta[k]] = e[b, k]
        r[lay.I[j]] = -1.0
        rows_h.append(problem.noise)
        # I_b - exp(Y_b) >= 0
        r = row()
        r[lay.I[j]] = 1.0
        rows_h.append(0.0)
        nl_row.append(len(rows_G) - 1)
        nl_col.append(lay.Y[j])
        nl_kind.append(NEG_EXP)
        nl_scale.append(1.0)
        # exp(xl)(X - xl + 1) - alpha >= 0
        r = row()
        ex = math.exp(x_lin[b])
        r[lay.X[j]] = ex
        r[lay.alpha[b]] = -1.0
        rows_h.append(ex * (1.0 - x_lin[b]))
        # 2^cl (ln2 (C - cl) + 1) - 1 - exp(Z) >= 0
        r = row()
        pc = 2.0 ** c_lin[b]
        r[lay.C[j]] = pc * _LN2
        rows_h.append(pc * (1.0 - _LN2 * c_lin[b]) - 1.0)
        nl_row.append(len(rows_G) - 1)
        nl_col.append(lay.Z[j])
        nl_kind.append(NEG_EXP)
        nl_scale.append(1.0)

    c = np.zeros(n)
    c[lay.tau] = -1.0
    A = np.zeros((1, n))
    A[0, lay.alpha] = 1.0
    A[0, lay.beta] = 1.0
    prog = ConvexProgram(
        c=c,
        G=np.array(rows_G),
        h=np.array(rows_h),
        A=A,
        b=np.array([problem.total_power]),
        nl_row=np.array(nl_row, dtype=int),
        nl_col=np.array(nl_col, dtype=int),
        nl_kind=np.array(nl_kind, dtype=int),
        nl_scale=np.array(nl_scale, dtype=float),
    )
    return prog, lay


def eve_interference(problem: PaProblem, alpha, beta) -> np.ndarray:
    """Left side of Eve's interference-plus-noise constraint for every target."""
    e = problem.e
    tot = alpha + beta
    return e @ tot - np.diag(e) * alpha + problem.noise


def initial_iterate(problem: PaProblem, alpha=None, beta=None) -> PaIterate:
    """Strictly feasible starting point (every inequality has positive slack)."""
    if alpha is None or beta is None:
        alpha, beta = problem.uniform()
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    B = problem.n_users
    own = np.diag(problem.e)
    active = own > 0.0
    I = 0.99 * eve_interference(problem, alpha, beta)
    Y = np.log(I) - 0.01
    X = np.log(alpha) + 0.01
    Z = np.full(B, np.nan)
    C = np.zeros(B)
    Z[active] = np.log(own[active]) + X[active] - Y[active] + 0.01
    C[active] = np.log2(1.0 + np.exp(Z[active])) + 0.01
    rb = np.log2(1.0 + problem.a * alpha)
    tau = float(np.min(rb - C)) - 0.01
    nan = np.full(B, np.nan)
    I = np.where(active, I, nan)
    Y = np.where(active, Y, nan)
    X = np.where(active, X, nan)
    return PaIterate(alpha, beta, tau, C, I, X, Y, Z, x_lin=X.copy(), c_lin=C.copy())


def p4_residuals(problem: PaProblem, it: PaIterate) -> np.ndarray:
    """Constraint values of the linearized subproblem at ``it`` (all >= 0 when feasible)."""
    prog, lay = build_program(problem, np.nan_to_num(it.x_lin), np.nan_to_num(it.c_lin))
    return prog.constraints(_pack(lay, it))


def solve_inner_convex(
    problem: PaProblem,
    start: PaIterate,
    opts: BarrierOptions | None = None,
) -> PaIterate:
    """Solve the convex subproblem linearized at ``start.x_lin`` / ``start.c_lin``.

    ``start`` must be strictly feasible for that subproblem.
    """
    x_lin = np.nan_to_num(start.x_lin)
    c_lin = np.nan_to_num(start.c_lin)
    prog, lay = build_program(problem, x_lin, c_lin)
    res = solve_barrier(prog, _pack(lay, start), opts)
    it = _unpack(lay, res.x, start.x_lin, start.c_lin)
    it.kkt_residual = res.kkt_residual
    it.min_slack = res.slack_min
    return it


def _clip_power(alpha: np.ndarray, beta: np.ndarray, total: float) -> tuple[np.ndarray, np.ndarray]:
    # Barrier floors become exact zeros; the removed mass goes to the largest entry.
    v = np.concatenate([alpha, beta])
    v = np.where(v < CLIP_BELOW * total, 0.0, v)
    k = int(np.argmax(v))
    v[k] += total - v.sum()
    B = alpha.size
    return v[:B], v[B:]


def _solution(problem: PaProblem, alpha, beta, tau, trace, converged, iterations, residuals=None) -> PaSolution:
    rep = secrecy_report(problem.gains(), alpha, beta)
    return PaSolution(alpha, beta, tau, rep.secrecy, list(trace), converged, iterations, list(residuals or []))


def solve_sca(
    problem: PaProblem,
    opts: ScaOptions | None = None,
    start: tuple[np.ndarray, np.ndarray] | None = None,
    trace_csv: str | None = None,
) -> PaSolution:
    """Successive convex approximation from the uniform split (or ``start``).

    The returned allocation never has a lower min-secrecy than the starting one.
    """
    opts = opts or ScaOptions()
    it = initial_iterate(problem, *(start or problem.uniform()))
    alpha0, beta0 = it.alpha.copy(), it.beta.copy()
    trace: list[float] = []
    residuals: list[float] = []
    converged = False
    n_iter = 0
    prev_tau = it.tau
    for n_iter in range(1, opts.max_iter + 1):
        new = solve_inner_convex(problem, it, opts.barrier)
        if new.tau < prev_tau - 1e-6:
            raise NonMonotone(f"SCA objective fell from {prev_tau:.9g} to {new.tau:.9g} at iteration {n_iter}")
        if new.tau < prev_tau:
            # Barrier round-off below the previous point: keep it and stop.
            converged = True
            break
        trace.append(new.tau)
        residuals.append(max(0.0, -float(p4_residuals(problem, new).min())))
        step = new.tau - prev_tau
        prev_tau = new.tau
        it = new
        it.x_lin = it.X.copy()
        it.c_lin = it.C.copy()
        if step < opts.tol and n_iter > 1:
            converged = True
            break
    if trace_csv:
        with open(trace_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "tau", "feasibility_residual"])
            for k, (t, r) in enumerate(zip(trace, residuals), 1):
                w.writerow([k, repr(t), repr(r)])
    alpha, beta = _clip_power(it.alpha, it.beta, problem.total_power)
    sol = _solution(problem, alpha, beta, prev_tau, trace, converged, n_iter, residuals)
    start_min = problem.min_secrecy(alpha0, beta0)
    if sol.min_secrecy < start_min:
        sol = _solution(problem, alpha0, beta0, prev_tau, trace, converged, n_iter, residuals)
    return sol


def fixed_pa(problem: PaProblem, fraction: float = 0.5) -> PaSolution:
    """Equal per-user power with ``fraction`` of it on the information symbol."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must lie in [0, 1], got {fraction!r}")
    B = problem.n_users
    per_user = problem.total_power / B
    alpha = np.full(B, fraction * per_user)
    beta = np.full(B, (1.0 - fraction) * per_user)
    gaps = secrecy_gaps(problem.gains(), alpha, beta)
    return _solution(problem, alpha, beta, float(gaps.min()), [], True, 0)


def _compositions(units: int, parts: int):
    # Stars and bars, yielded in chunks to bound memory for three users.
    chunk = []
    for bars in itertools.combinations(range(units + parts - 1), parts - 1):
        prev = -1
        row = []
        for bpos in bars:
            row.append(bpos - prev - 1)
            prev = bpos
        row.append(units + parts - 2 - prev)
        chunk.append(row)
        if len(chunk) == 200_000:
            yield np.array(chunk, dtype=float)
            chunk = []
    if chunk:
        yield np.array(chunk, dtype=float)


def _min_secrecy_batch(problem: PaProblem, alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    # Vectorized over rows; same arithmetic as secrecy.secrecy_report.
    e = problem.e
    own = np.diag(e)
    gb = problem.a * alpha
    tot = alpha + beta
    denom = own * beta + (tot @ e.T - own * tot) + problem.noise
    ge = np.where(own * alpha > 0, own * alpha / denom, 0.0)
    s = np.log2(1.0 + gb) - np.log2(1.0 + ge)
    return np.maximum(s, 0.0).min(axis=1)


def grid_search_oracle(problem: PaProblem, step: float = 0.02) -> PaSolution:
    """Exhaustive search over the power simplex at resolution ``step * total_power``."""
    B = problem.n_users
    if B > 3:
        raise ValueError(f"grid search supports at most 3 users, got {B}")
    units = int(round(1.0 / step))
    if units < 1 or not math.isclose(units * step, 1.0, rel_tol=1e-9):
        raise ValueError(f"step must divide 1 evenly, got {step!r}")
    best_val = -math.inf
    best = None
    for comp in _compositions(units, 2 * B):
        pw = comp * (problem.total_power / units)
        vals = _min_secrecy_batch(problem, pw[:, :B], pw[:, B:])
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val = float(vals[k])
            best = pw[k]
    alpha, beta = best[:B].copy(), best[B:].copy()
    gaps = secrecy_gaps(problem.gains(), alpha, beta)
    return _solution(problem, alpha, beta, float(gaps.min()), [], True, 0)
