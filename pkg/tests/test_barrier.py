import math

import numpy as np
import pytest

from holosec.barrier import LOG2, NEG_EXP, ConvexProgram, Infeasible, solve_barrier


def _prog(c, G, h, A, b, nl=()):
    rows, cols, kinds, scales = zip(*nl) if nl else ((), (), (), ())
    return ConvexProgram(
        np.asarray(c, float), np.asarray(G, float), np.asarray(h, float),
        np.asarray(A, float), np.asarray(b, float),
        np.array(rows, int), np.array(cols, int), np.array(kinds, int), np.array(scales, float),
    )


def test_linear_program():
    # min x0 + 2 x1  s.t. x0, x1 >= 0, x0 + x1 = 1  ->  (1, 0)
    prog = _prog([1, 2], [[1, 0], [0, 1]], [0, 0], [[1, 1]], [1])
    res = solve_barrier(prog, np.array([0.5, 0.5]))
    np.testing.assert_allclose(res.x, [1, 0], atol=1e-7)


def test_log_constraint():
    # max t  s.t. log2(1 + x) - t >= 0, x >= 0, y >= 0, x + y = 3  ->  t = 2
    prog = _prog(
        [0, 0, -1],
        [[-0.0, 0, -1], [1, 0, 0], [0, 1, 0]],
        [0, 0, 0],
        [[1, 1, 0]],
        [3],
        nl=[(0, 0, LOG2, 1.0)],
    )
    res = solve_barrier(prog, np.array([1.0, 2.0, 0.5]))
    assert res.x[2] == pytest.approx(2.0, abs=1e-7)
    assert res.x[0] == pytest.approx(3.0, abs=1e-6)


def test_exp_constraint():
    # min u  s.t. u - exp(v) >= 0, v = ln 2  ->  u = 2
    prog = _prog([1, 0], [[1, 0]], [0], [[0, 1]], [math.log(2)], nl=[(0, 1, NEG_EXP, 1.0)])
    res = solve_barrier(prog, np.array([5.0, math.log(2)]))
    assert res.x[0] == pytest.approx(2.0, abs=1e-7)


def test_infeasible_start_rejected():
    prog = _prog([1, 2], [[1, 0], [0, 1]], [0, 0], [[1, 1]], [1])
    with pytest.raises(Infeasible):
        solve_barrier(prog, np.array([-0.5, 1.5]))


def test_duplicate_nonlinear_rows_rejected():
    with pytest.raises(ValueError):
        _prog([1], [[1]], [0], np.zeros((0, 1)), [], nl=[(0, 0, LOG2, 1.0), (0, 0, NEG_EXP, 1.0)])
