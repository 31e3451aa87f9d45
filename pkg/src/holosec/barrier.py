"""Log-barrier interior-point method for small dense convex programs.

Solves

    minimize    c @ x
    subject to  g(x) = G @ x + h + sum of separable concave terms >= 0
                A @ x = b

where each separable term adds ``log2(1 + s * x_j)`` or ``-s * exp(x_j)`` to one
constraint row. That family covers everything the power-allocation subproblem
needs, and keeps gradients and Hessians cheap to form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LOG2 = 1
NEG_EXP = 2

_LN2 = math.log(2.0)


class Infeasible(RuntimeError):
    pass


class MaxIterations(RuntimeError):
    pass


@dataclass
class BarrierOptions:
    t0: float = 1.0
    mu: float = 10.0
    gap_tol: float = 1e-8
    newton_tol: float = 1e-9
    ls_alpha: float = 0.01
    ls_beta: float = 0.5
    max_newton: int = 200
    max_total_newton: int = 2000


@dataclass
class ConvexProgram:
    c: np.ndarray
    G: np.ndarray
    h: np.ndarray
    A: np.ndarray
    b: np.ndarray
    nl_row: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    nl_col: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    nl_kind: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    nl_scale: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        if np.unique(self.nl_row).size != self.nl_row.size:
            raise ValueError("each constraint row may carry at most one nonlinear term")
        self._lg = np.flatnonzero(self.nl_kind == LOG2)
        self._ex = np.flatnonzero(self.nl_kind != LOG2)
        self._lg_col = self.nl_col[self._lg]
        self._ex_col = self.nl_col[self._ex]
        self._lg_row = self.nl_row[self._lg]
        self._ex_row = self.nl_row[self._ex]
        self._lg_s = self.nl_scale[self._lg]
        self._ex_s = self.nl_scale[self._ex]

    @property
    def n_ineq(self) -> int:
        return self.G.shape[0]

    def _terms(self, x: np.ndarray):
        arg = 1.0 + self._lg_s * x[self._lg_col]
        ev = self._ex_s * np.exp(x[self._ex_col])
        return arg, ev

    def constraints(self, x: np.ndarray) -> np.ndarray:
        g = self.G @ x + self.h
        arg, ev = self._terms(x)
        # Each nonlinear term owns a distinct row, so plain fancy-index adds are safe.
        g[self._lg_row] += np.log2(arg)
        g[self._ex_row] -= ev
        return g

    def in_domain(self, x: np.ndarray) -> bool:
        if not np.all(np.isfinite(x)):
            return False
        return bool(np.all(1.0 + self._lg_s * x[self._lg_col] > 0.0))

    def jacobian(self, x: np.ndarray):
        """Constraint Jacobian and the diagonal second derivatives of the nonlinear terms."""
        arg, ev = self._terms(x)
        J = self.G.copy()
        J[self._lg_row, self._lg_col] += self._lg_s / (arg * _LN2)
        J[self._ex_row, self._ex_col] -= ev
        d2 = np.empty(self.nl_row.size)
        d2[self._lg] = -(self._lg_s**2) / (arg * arg * _LN2)
        d2[self._ex] = -ev
        return J, d2


@dataclass
class BarrierResult:
    x: np.ndarray
    t: float
    newton_steps: int
    kkt_residual: float
    slack_min: float


def _barrier_value(prog: ConvexProgram, x: np.ndarray, t: float) -> float:
    if not prog.in_domain(x):
        return math.inf
    with np.errstate(invalid="ignore", over="ignore"):
        g = prog.constraints(x)
    if not np.all(g > 0.0) or not np.all(np.isfinite(g)):
        return math.inf
    return t * float(prog.c @ x) - float(np.sum(np.log(g)))


def _newton_direction(prog: ConvexProgram, x: np.ndarray, t: float):
    """Newton step of the barrier function restricted to ``A dx = b - A x``.

    The system is kept in augmented form ``[M J^T A^T; J -diag(g^2) 0; A 0 0]``
    instead of forming ``J^T diag(1/g^2) J``: once slacks reach ~1e-10 the
    condensed Hessian has rank-one terms ~1e20 and loses all precision.
    """
    g = prog.constraints(x)
    J, d2 = prog.jacobian(x)
    inv = 1.0 / g
    grad = t * prog.c - J.T @ inv
    n = x.size
    m = g.size
    p = prog.A.shape[0]
    K = np.zeros((n + m + p, n + m + p))
    if prog.nl_row.size:
        np.add.at(K, (prog.nl_col, prog.nl_col), -d2 * inv[prog.nl_row])
    K[:n, n : n + m] = J.T
    K[n : n + m, :n] = J
    K[n : n + m, n : n + m] = -np.diag(g * g)
    K[:n, n + m :] = prog.A.T
    K[n + m :, :n] = prog.A
    rhs = np.zeros(n + m + p)
    rhs[:n] = -grad
    rhs[n + m :] = prog.b - prog.A @ x
    # Row/column equilibration on the constraint block.
    d = np.ones(n + m + p)
    d[n : n + m] = inv
    Ks = K * d[:, None] * d[None, :]
    try:
        sol = d * np.linalg.solve(Ks, rhs * d)
    except np.linalg.LinAlgError:
        sol = d * np.linalg.lstsq(Ks, rhs * d, rcond=None)[0]
    dx = sol[:n]
    jdx = (J @ dx) * inv
    curv = float(jdx @ jdx)
    if prog.nl_row.size:
        curv += float(np.sum(-d2 * inv[prog.nl_row] * dx[prog.nl_col] ** 2))
    return dx, sol[n + m :], curv, g, jdx


def solve_barrier(prog: ConvexProgram, x0: np.ndarray, opts: BarrierOptions | None = None) -> BarrierResult:
    """Minimize from a strictly feasible ``x0`` that satisfies the equalities."""
    opts = opts or BarrierOptions()
    x = np.array(x0, dtype=float)
    g0 = prog.constraints(x)
    if not prog.in_domain(x) or np.any(g0 <= 0.0):
        raise Infeasible(f"starting point is not strictly feasible (min slack {g0.min():.3e})")
    m = prog.n_ineq
    t = opts.t0
    total = 0
    while True:
        for _ in range(opts.max_newton):
            dx, _, dec2, _, _ = _newton_direction(prog, x, t)
            if dec2 / 2.0 <= opts.newton_tol:
                break
            f0 = _barrier_value(prog, x, t)
            step = 1.0
            while True:
                xn = x + step * dx
                fn = _barrier_value(prog, xn, t)
                if fn <= f0 - opts.ls_alpha * step * dec2:
                    break
                step *= opts.ls_beta
                if step < 1e-14:
                    break
            if step < 1e-14:
                break
            x = xn
            total += 1
            if f0 - fn <= 1e-13 * max(1.0, abs(f0)):
                # Decrease is at the round-off level of the barrier value.
                break
            if total > opts.max_total_newton:
                raise MaxIterations(f"barrier method exceeded {opts.max_total_newton} Newton steps")
        else:
            raise MaxIterations(f"centering did not converge within {opts.max_newton} Newton steps at t={t:.1e}")
        if m / t < opts.gap_tol:
            break
        t *= opts.mu
    dx, w, _, g, jdx = _newton_direction(prog, x, t)
    # Multipliers from the last Newton system: lambda = (1 - J dx / g) / (t g).
    lam = (1.0 - jdx) / (t * g)
    J, _ = prog.jacobian(x)
    stat = prog.c - J.T @ lam + prog.A.T @ (w / t)
    kkt = max(
        float(np.abs(stat).max()),
        float(np.abs(lam * g).max()),
        float(np.abs(prog.A @ x - prog.b).max(initial=0.0)),
    )
    return BarrierResult(x, t, total, kkt, float(g.min()))
