import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linprog

import oracles
from propalign.simplex import UnboundedError, fictitious_play, solve_lp_max, solve_zero_sum


def test_small_lp():
    # max 3x + 2y  s.t. x + y <= 4, x + 3y <= 6  ->  x=4, y=0
    res = solve_lp_max(np.array([3.0, 2.0]), np.array([[1.0, 1.0], [1.0, 3.0]]), np.array([4.0, 6.0]))
    np.testing.assert_allclose(res.x, [4.0, 0.0], atol=1e-12)
    assert res.objective == pytest.approx(12.0)
    # strong duality
    assert res.dual @ np.array([4.0, 6.0]) == pytest.approx(12.0)


def test_unbounded_lp():
    with pytest.raises(UnboundedError):
        solve_lp_max(np.array([1.0, 0.0]), np.array([[-1.0, 1.0]]), np.array([1.0]))


@given(arrays(float, (4, 3), elements=st.floats(0.05, 5)),
       arrays(float, 4, elements=st.floats(0.1, 5)),
       arrays(float, 3, elements=st.floats(-2, 5)))
def test_lp_matches_scipy(A, b, c):
    ours = solve_lp_max(c, A, b)
    ref = linprog(-c, A_ub=A, b_ub=b, bounds=(0, None), method="highs")
    assert ref.status == 0
    assert ours.objective == pytest.approx(-ref.fun, abs=1e-8)
    assert np.all(A @ ours.x <= b + 1e-9) and np.all(ours.x >= -1e-12)


def test_degenerate_lp_terminates():
    # a classic cycling example for Dantzig's rule; Bland's rule must finish
    c = np.array([10.0, -57.0, -9.0, -24.0])
    A = np.array([[0.5, -5.5, -2.5, 9.0], [0.5, -1.5, -0.5, 1.0], [1.0, 0.0, 0.0, 0.0]])
    b = np.array([0.0, 0.0, 1.0])
    res = solve_lp_max(c, A, b)
    assert res.objective == pytest.approx(1.0)


@pytest.mark.parametrize("payoff, value", [
    (np.array([[0.0, 1.0], [1.0, 0.0]]), 0.5),
    (np.array([[2.0, -1.0], [-1.0, 1.0]]), 0.2),
    (np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]]), 0.0),
])
def test_zero_sum_known_values(payoff, value):
    g = solve_zero_sum(payoff)
    assert g.value == pytest.approx(value, abs=1e-12)
    # row strategy guarantees the value against every column, and vice versa
    assert (g.row_strategy @ payoff).min() >= value - 1e-12
    assert (payoff @ g.col_strategy).max() <= value + 1e-12


@given(arrays(float, (4, 5), elements=st.floats(-3, 3)))
def test_zero_sum_value_matches_scipy(payoff):
    g = solve_zero_sum(payoff)
    v, _ = oracles.game_value(payoff)
    assert g.value == pytest.approx(v, abs=1e-8)
    assert abs(g.row_strategy.sum() - 1) < 1e-9 and abs(g.col_strategy.sum() - 1) < 1e-9


def test_fictitious_play_approaches_lp_value():
    rng = np.random.default_rng(0)
    payoff = rng.random((5, 5))
    g = solve_zero_sum(payoff)
    fp = fictitious_play(payoff, 20000)
    assert (fp.row_strategy @ payoff).min() == pytest.approx(g.value, abs=5e-3)
