"""Simplex solver: known programs, certificates, and a scipy cross-check."""

import numpy as np
import pytest

from minkdev.lp import LPOutcome, solve_lp


def test_simple_optimal():
    out = solve_lp(np.array([1.0, 1.0]), A_ub=[[1, 2], [1, 0]], b_ub=[4, 3])
    assert out.status == "optimal"
    assert out.value == pytest.approx(3.5)
    assert out.point == pytest.approx([3.0, 0.5])


def test_equality_constraints():
    # max x0 s.t. x0 + x1 = 1
    out = solve_lp(np.array([1.0, 0.0]), A_eq=[[1, 1]], b_eq=[1.0])
    assert out.status == "optimal"
    assert out.value == pytest.approx(1.0)


def test_unbounded_with_certified_ray():
    out = solve_lp(np.array([1.0, 0.0]), A_ub=[[-1, 1]], b_ub=[1.0])
    assert out.status == "unbounded"
    ray = out.ray
    assert ray is not None
    A = np.array([[-1.0, 1.0]])
    assert np.all(A @ ray <= 1e-9)          # stays feasible along the ray
    assert np.all(ray >= -1e-9)             # respects x >= 0
    assert float(np.array([1.0, 0.0]) @ ray) > 1e-9  # improves the objective


def test_infeasible():
    # x <= -1 with x >= 0
    out = solve_lp(np.array([1.0]), A_ub=[[1.0]], b_ub=[-1.0])
    assert out.status == "infeasible"


def test_negative_rhs_requires_phase_one():
    # x0 + x1 >= 1 encoded as -(x0 + x1) <= -1; max -x0 - x1 -> value -1
    out = solve_lp(np.array([-1.0, -1.0]), A_ub=[[-1, -1]], b_ub=[-1.0])
    assert out.status == "optimal"
    assert out.value == pytest.approx(-1.0)


def test_degenerate_problem_terminates():
    # classic cycling-prone tableau; Bland's rule must terminate
    c = np.array([0.75, -150.0, 0.02, -6.0])
    A = [
        [0.25, -60.0, -0.04, 9.0],
        [0.5, -90.0, -0.02, 3.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
    b = [0.0, 0.0, 1.0]
    out = solve_lp(c, A_ub=A, b_ub=b)
    assert out.status == "optimal"
    assert out.value == pytest.approx(0.05, abs=1e-9)


def test_no_constraints():
    assert solve_lp(np.array([-1.0, -2.0])).value == 0.0
    assert solve_lp(np.array([1.0])).status == "unbounded"


def test_cross_check_against_scipy():
    from scipy.optimize import linprog

    rng = np.random.default_rng(0)
    for _ in range(30):
        n = int(rng.integers(2, 6))
        m = int(rng.integers(2, 7))
        c = rng.uniform(-2, 2, size=n)
        A = rng.uniform(-1, 1, size=(m, n))
        b = rng.uniform(0.5, 2.0, size=m)  # 0 feasible
        mine = solve_lp(c, A_ub=A, b_ub=b)
        ref = linprog(-c, A_ub=A, b_ub=b, bounds=[(0, None)] * n, method="highs")
        if mine.status == "optimal":
            assert ref.status == 0
            assert mine.value == pytest.approx(-ref.fun, abs=1e-8)
        else:
            assert mine.status == "unbounded"
            assert ref.status == 3
