import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sfpsro import oracles
from sfpsro.errors import ConvergenceError, EmptyWindow, InvalidOutcome, ShapeError, SlotError
from sfpsro.meta_solvers import (
    MetaStrategy,
    OutcomeBuffer,
    hedge_update,
    mss_last,
    mss_uniform,
    record_outcome,
    solve_matrix_game,
    solve_zero_sum_nash,
    support,
)

RPS = np.array([[0, -1, 1], [1, 0, -1], [-1, 1, 0]], dtype=float)


def antisym(upper, n):
    P = np.zeros((n, n))
    P[np.triu_indices(n, 1)] = upper
    return P - P.T


def test_rps_nash():
    sol = solve_zero_sum_nash(RPS)
    assert np.allclose(sol.strategy, 1 / 3, atol=1e-6)
    assert abs(sol.value) <= 1e-6
    assert sol.residual <= 1e-6


def test_dominant_first_strategy():
    sol = solve_zero_sum_nash([[0, 1], [-1, 0]])
    assert np.allclose(sol.strategy, [1, 0], atol=1e-6)
    v, x, _ = oracles.support_enumeration_value(np.array([[0, 1], [-1, 0]], dtype=float))
    assert v == 0 and x.tolist() == [1.0, 0.0]


def test_single_entry():
    sol = solve_zero_sum_nash([[0.0]])
    assert sol.strategy.tolist() == [1.0] and sol.value == 0.0


def test_shape_errors():
    with pytest.raises(ShapeError):
        solve_zero_sum_nash(np.zeros((2, 3)))
    with pytest.raises(ShapeError):
        solve_zero_sum_nash(np.zeros((0, 0)))
    with pytest.raises(ShapeError):
        solve_matrix_game(np.zeros(3))


def test_convergence_error_carries_residual(monkeypatch):
    from sfpsro import meta_solvers

    # without the polish, 16 regret-matching steps cannot reach 1e-12 on this game
    monkeypatch.setattr(meta_solvers, "_polish_symmetric", lambda P: None)
    P = antisym([1, -2, 0.5, 1, 2, -1], 4)
    with pytest.raises(ConvergenceError) as info:
        solve_zero_sum_nash(P, tol=1e-12, max_iter=16)
    assert info.value.residual > 1e-12


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 4).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.integers(-2, 2), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2))
))
def test_nash_matches_support_enumeration(case):
    n, upper = case
    P = antisym(upper, n)
    sol = solve_zero_sum_nash(P, 1e-6)
    v_oracle, _, _ = oracles.support_enumeration_value(P)
    assert abs(sol.value - v_oracle) <= 1e-6
    x = sol.strategy
    assert (P @ x).max() - x @ P @ x <= 1e-6
    assert abs(x.sum() - 1) <= 1e-9 and x.min() >= 0


def test_exhaustive_3x3():
    for upper in itertools.product(range(-2, 3), repeat=3):
        P = antisym(upper, 3)
        x = solve_zero_sum_nash(P).strategy
        assert (P @ x).max() - x @ P @ x <= 1e-6


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_rectangular_game_matches_oracle(m, n, seed):
    A = np.random.default_rng(seed).integers(-2, 3, size=(m, n)).astype(float)
    x, y, value, gap = solve_matrix_game(A)
    v_oracle, _, _ = oracles.support_enumeration_value(A)
    assert abs(value - v_oracle) <= 1e-6
    assert gap <= 1e-6


def test_matching_pennies_value():
    x, y, value, _ = solve_matrix_game([[1, -1], [-1, 1]])
    assert abs(value) <= 1e-6
    assert np.allclose(x, 0.5, atol=1e-4) and np.allclose(y, 0.5, atol=1e-4)


def test_support_threshold():
    assert support([0.5, 5e-5, 0.49995]).tolist() == [0, 2]
    assert support([0.0, 0.0, 1.0]).tolist() == [2]


def test_mss_examples():
    assert mss_uniform(1).weights.tolist() == [1.0]
    assert mss_uniform(4).weights.tolist() == [0.25] * 4
    w = mss_uniform(30).weights
    assert len(w) == 30 and np.all(w == 1 / 30)
    assert mss_last(1).weights.tolist() == [1.0]
    assert mss_last(3).weights.tolist() == [0.0, 0.0, 1.0]
    # after eliminating slot 0 and inserting age 7, mass follows the largest age
    assert mss_last(3, ages=[1, 7, 2]).weights.tolist() == [0.0, 1.0, 0.0]
    for f in (mss_uniform, mss_last):
        with pytest.raises(EmptyWindow):
            f(0)


def test_meta_strategy_validation():
    with pytest.raises(ValueError):
        MetaStrategy(np.array([0.5, 0.6]))
    with pytest.raises(EmptyWindow):
        MetaStrategy(np.array([]))


def test_hedge_examples():
    assert hedge_update(np.array([0.0, 0.0]), 1.0).weights.tolist() == [0.5, 0.5]
    assert np.allclose(hedge_update(np.array([3.0, -1.0, 0.2]), 0.0).weights, 1 / 3, atol=1e-15)
    w = hedge_update(np.array([1.0, 0.0]), 1.0).weights
    assert w == pytest.approx([math.e / (1 + math.e), 1 / (1 + math.e)], abs=1e-15)
    assert w == pytest.approx([0.7311, 0.2689], abs=1e-4)


def test_hedge_errors_and_overflow():
    with pytest.raises(InvalidOutcome):
        hedge_update(np.array([0.0, math.nan]), 1.0)
    with pytest.raises(ValueError):
        hedge_update(np.array([0.0]), -1.0)
    w = hedge_update(np.array([1e6, 0.0]), 10.0).weights
    assert w.tolist() == [1.0, 0.0]


def test_hedge_from_buffer_empty_slot_is_neutral():
    buf = OutcomeBuffer(2)
    record_outcome(buf, 0, 1.0)
    w = hedge_update(buf, 1.0).weights
    assert w == pytest.approx([math.e / (1 + math.e), 1 / (1 + math.e)], abs=1e-15)


finite = st.floats(-50, 50, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(finite, min_size=1, max_size=8), st.floats(0, 5), st.floats(-100, 100))
def test_hedge_shift_invariance(S, eta, c):
    S = np.array(S)
    a = hedge_update(S, eta).weights
    b = hedge_update(S + c, eta).weights
    assert np.all(np.abs(a - b) <= 1e-12)
    assert abs(a.sum() - 1) <= 1e-9 and a.min() >= 0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=6), st.floats(0.01, 3), st.floats(0.01, 2))
def test_hedge_monotone(S, eta, bump):
    S = np.array(S)
    before = hedge_update(S, eta).weights[0]
    S2 = S.copy()
    S2[0] += bump
    after = hedge_update(S2, eta).weights[0]
    assume(before < 1 - 1e-12)
    assert after > before


def test_hedge_sublinear_regret():
    rng = np.random.default_rng(0)
    T = 10_000
    # a fixed adversarial-ish sequence over 3 slots with a slowly drifting leader
    stream = rng.uniform(-1, 1, size=(T, 3)) + 0.3 * np.sin(np.arange(T) / 500.0)[:, None] * np.array([1, -1, 0])
    eta = 0.1
    cum = np.zeros(3)
    gained = 0.0
    avg_regret = {}
    for t in range(T):
        w = hedge_update(cum, eta).weights
        gained += w @ stream[t]
        cum += stream[t]
        if t + 1 in (100, T):
            avg_regret[t + 1] = (cum.max() - gained) / (t + 1)
    assert avg_regret[T] <= avg_regret[100]


def test_record_outcome_examples():
    buf = OutcomeBuffer(1)
    record_outcome(buf, 0, 1.0)
    assert buf.mean(0) == 1.0
    buf = OutcomeBuffer(1)
    for _ in range(1000):
        record_outcome(buf, 0, 1.0)
    record_outcome(buf, 0, -1.0)
    assert buf.count(0) == 1000
    assert buf.mean(0) == pytest.approx(0.998, abs=1e-12)
    buf = OutcomeBuffer(1)
    record_outcome(buf, 0, 1.0)
    record_outcome(buf, 0, -1.0)
    assert buf.mean(0) == 0.0


def test_record_outcome_errors():
    buf = OutcomeBuffer(2)
    with pytest.raises(SlotError):
        record_outcome(buf, 2, 0.0)
    with pytest.raises(SlotError):
        record_outcome(buf, -1, 0.0)
    with pytest.raises(InvalidOutcome):
        record_outcome(buf, 0, math.inf)


def test_buffer_slot_removal_discards_history():
    buf = OutcomeBuffer(3)
    for slot, v in ((0, 1.0), (1, -1.0), (2, 0.5)):
        record_outcome(buf, slot, v)
    buf.remove_slot(1)
    assert buf.means().tolist() == [1.0, 0.5]
    buf.add_slot()
    assert buf.count(2) == 0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=2500))
def test_buffer_mean_matches_contents(values):
    buf = OutcomeBuffer(1)
    for v in values:
        record_outcome(buf, 0, v)
    kept = values[-1000:]
    assert buf.contents(0) == kept
    assert abs(buf.mean(0) - math.fsum(kept) / len(kept)) <= 1e-12
