"""Gauge and cogauge solvers: extended-real semantics, brackets, budgets."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minkdev.deviations import builtin_deviation, builtin_error
from minkdev.gauge import (
    GaugeOptions,
    OracleBudgetError,
    cogauge,
    deviation_from_set,
    minkowski_gauge,
    shift_infimum_gauge,
)
from minkdev.market import MarketSpace
from minkdev.sets import AcceptanceSet, SetFlags, add_constants, ball_set, sublevel_set

BINARY = MarketSpace(np.array([0.25, 0.75]))
UNIFORM3 = MarketSpace(np.full(3, 1.0 / 3.0))
SPACE4 = MarketSpace(np.array([0.1, 0.2, 0.3, 0.4]))

TIGHT = GaugeOptions(tol_rel=1e-11, tol_abs=1e-13)


def constants_line(space):
    return AcceptanceSet(
        space=space,
        membership=lambda x: float(np.ptp(x)) <= 1e-12,
        flags=SetFlags(star_shaped=True, convex=True, closed=True, stable_scalar_add=True),
        label="constants",
    )


def empty_set(space):
    return AcceptanceSet(space=space, membership=lambda x: False,
                         flags=SetFlags(star_shaped=True), label="empty")


def whole_space(space):
    return AcceptanceSet(space=space, membership=lambda x: True,
                         flags=SetFlags(star_shaped=True, convex=True, closed=True),
                         label="all")


# --- gauge of a ball equals the norm ---------------------------------------

def test_gauge_of_unit_ball_is_the_weighted_norm():
    A = ball_set(UNIFORM3, p=2.0, radius=1.0)
    rng = np.random.default_rng(0)
    for _ in range(25):
        x = rng.uniform(-4, 4, size=3)
        want = math.sqrt(float(UNIFORM3.probs @ (x * x)))
        got = minkowski_gauge(A, x, TIGHT)
        assert got.value == pytest.approx(want, rel=1e-9)
        lo, hi = got.bracket
        assert lo <= want <= hi or want == pytest.approx(hi, rel=1e-9)


def test_gauge_extended_real_cases():
    x = np.array([1.0, 2.0, 3.0])
    assert minkowski_gauge(empty_set(UNIFORM3), x).value == math.inf
    assert minkowski_gauge(whole_space(UNIFORM3), x).value == 0.0
    # constants line: infinite on non-constants, zero on constants
    line = constants_line(UNIFORM3)
    assert minkowski_gauge(line, x).value == math.inf
    assert minkowski_gauge(line, np.array([2.0, 2.0, 2.0])).value == 0.0


def test_gauge_at_zero_position():
    A = ball_set(UNIFORM3, p=2.0, radius=1.0)
    res = minkowski_gauge(A, np.zeros(3))
    assert res.value == 0.0 and res.attained == "yes"
    res = minkowski_gauge(empty_set(UNIFORM3), np.zeros(3))
    assert res.value == math.inf


def test_boundary_point_and_attainment():
    A = ball_set(UNIFORM3, p=2.0, radius=1.0)
    x = np.array([2.0, -1.0, 0.5])
    res = minkowski_gauge(A, x, TIGHT)
    assert res.attained == "yes"
    assert A.contains(res.boundary_point)
    # just inside the bracket on the non-member side
    assert not A.contains(x / (res.value * (1 - 1e-6)))
    assert A.contains(x / (res.value * (1 + 1e-6)))


def test_oracle_budget_raises_with_bracket():
    A = ball_set(UNIFORM3, p=2.0, radius=1.0)
    with pytest.raises(OracleBudgetError) as exc:
        minkowski_gauge(A, np.array([3.0, 1.0, -2.0]), GaugeOptions(max_oracle_calls=5))
    assert exc.value.bracket[0] < exc.value.bracket[1]


def test_grid_fallback_marks_approximate():
    # same ball but with no structural declarations: forces the grid scan
    ball = ball_set(UNIFORM3, p=2.0, radius=1.0)
    blank = AcceptanceSet(space=UNIFORM3, membership=ball.membership, flags=SetFlags())
    x = np.array([2.0, -1.0, 0.5])
    res = minkowski_gauge(blank, x)
    want = minkowski_gauge(ball, x, TIGHT).value
    assert res.approximate
    assert res.value == pytest.approx(want, rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-20, 20), min_size=3, max_size=3), st.floats(0.05, 20.0))
def test_gauge_positive_homogeneity(values, lam):
    A = ball_set(UNIFORM3, p=2.0, radius=1.0)
    x = np.array(values)
    gx = minkowski_gauge(A, x, TIGHT).value
    glx = minkowski_gauge(A, lam * x, TIGHT).value
    assert glx == pytest.approx(lam * gx, rel=1e-8, abs=1e-10)


# --- cogauge -----------------------------------------------------------------

def test_cogauge_extended_real_cases():
    x = np.array([1.0, -1.0, 0.5])
    assert cogauge(whole_space(UNIFORM3), x).value == math.inf
    assert cogauge(empty_set(UNIFORM3), x).value == 0.0
    assert cogauge(whole_space(UNIFORM3), np.zeros(3)).value == math.inf
    assert cogauge(empty_set(UNIFORM3), np.zeros(3)).value == 0.0


def test_cogauge_is_gauge_of_complement_for_star_shaped_sets():
    ball = ball_set(UNIFORM3, p=2.0, radius=1.0)
    complement = AcceptanceSet(
        space=UNIFORM3,
        membership=lambda x: not ball.membership(x),
        flags=SetFlags(star_shaped=False, closed=False),
        label="ball complement",
    )
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = rng.uniform(-4, 4, size=3)
        g = minkowski_gauge(ball, x, TIGHT).value
        w = cogauge(complement, x, TIGHT).value
        assert w == pytest.approx(g, rel=1e-8, abs=1e-10)


# --- derived functionals ---------------------------------------------------------

def test_deviation_from_set_propagates_axioms():
    A = sublevel_set(SPACE4, builtin_deviation("std_dev"), 1.0)
    D = deviation_from_set(A, TIGHT)
    assert D.axioms.nonnegative is True
    assert D.axioms.translation_insensitive is True
    assert D.axioms.convex is True
    sd = builtin_deviation("std_dev")
    rng = np.random.default_rng(2)
    for _ in range(10):
        x = rng.uniform(-4, 4, size=4)
        assert D.eval(SPACE4, x) == pytest.approx(sd.eval(SPACE4, x), abs=1e-8)


def test_shift_infimum_matches_add_constants_route():
    A = sublevel_set(SPACE4, builtin_error("kb", alpha=0.1), 1.0)
    AR = add_constants(A)
    rng = np.random.default_rng(3)
    for _ in range(15):
        x = rng.uniform(-4, 4, size=4)
        via_set = minkowski_gauge(AR, x, TIGHT).value
        via_shift = shift_infimum_gauge(A, x, TIGHT).value
        assert via_shift == pytest.approx(via_set, abs=1e-6)


def test_shift_infimum_of_ball_is_std_dev():
    ball = ball_set(SPACE4, p=2.0, radius=1.0)
    sd = builtin_deviation("std_dev")
    rng = np.random.default_rng(4)
    for _ in range(10):
        x = rng.uniform(-4, 4, size=4)
        res = shift_infimum_gauge(ball, x, TIGHT)
        assert res.value == pytest.approx(sd.eval(SPACE4, x), abs=1e-8)
        # the optimal shift for the L2 ball is the mean
        assert res.shift == pytest.approx(float(SPACE4.probs @ x), abs=1e-4)
