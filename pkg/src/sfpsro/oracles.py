"""Independent brute-force oracles for checking the solvers.

Deliberately self-contained: nothing here imports the rest of the package.
"""
import itertools
from fractions import Fraction

import numpy as np

KUHN_CARDS = (0, 1, 2)
# Kuhn decision points: (card, history) for each seat.
KUHN_P0_POINTS = [(c, h) for c in KUHN_CARDS for h in ("", "pb")]
KUHN_P1_POINTS = [(c, h) for c in KUHN_CARDS for h in ("p", "b")]


def _kuhn_payoff(cards, hist):
    """Return seat-0 payoff for a terminal history or None."""
    win = 1 if cards[0] > cards[1] else -1
    if hist == "pp":
        return win
    if hist in ("bb", "pbb"):
        return 2 * win
    if hist == "bp":
        return 1
    if hist == "pbp":
        return -1
    return None


def kuhn_value(strat0, strat1):
    """Exact seat-0 value. Strategies map (card, hist) -> P(bet)."""
    total = Fraction(0)
    for cards in itertools.permutations(KUHN_CARDS, 2):
        total += Fraction(1, 6) * _kuhn_walk(cards, "", strat0, strat1)
    return total


def _kuhn_walk(cards, hist, s0, s1):
    pay = _kuhn_payoff(cards, hist)
    if pay is not None:
        return Fraction(pay)
    seat = len(hist) % 2
    strat = s0 if seat == 0 else s1
    p_bet = Fraction(strat[(cards[seat], hist)])
    return (1 - p_bet) * _kuhn_walk(cards, hist + "p", s0, s1) + p_bet * _kuhn_walk(
        cards, hist + "b", s0, s1
    )


def kuhn_uniform():
    return {k: Fraction(1, 2) for k in KUHN_P0_POINTS + KUHN_P1_POINTS}


def kuhn_best_response_value(seat, opponent):
    """Max over all 64 pure strategies of `seat` against `opponent`."""
    points = KUHN_P0_POINTS if seat == 0 else KUHN_P1_POINTS
    best = None
    for bits in itertools.product((0, 1), repeat=len(points)):
        pure = dict(zip(points, map(Fraction, bits)))
        if seat == 0:
            v = kuhn_value(pure, opponent)
        else:
            v = -kuhn_value(opponent, pure)
        if best is None or v > best:
            best = v
    return best


def support_enumeration_value(A):
    """Value and a maximin row strategy of the zero-sum game A (row maximizes).

    Tries every pair of equal-size supports and solves the indifference system.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    for k in range(1, min(m, n) + 1):
        for rows in itertools.combinations(range(m), k):
            for cols in itertools.combinations(range(n), k):
                sub = A[np.ix_(rows, cols)]
                # x^T sub = v 1, sum x = 1 ; sub y = v 1, sum y = 1
                M = np.zeros((k + 1, k + 1))
                M[:k, :k] = sub.T
                M[:k, k] = -1
                M[k, :k] = 1
                rhs = np.zeros(k + 1)
                rhs[k] = 1
                try:
                    sol_x = np.linalg.solve(M, rhs)
                except np.linalg.LinAlgError:
                    continue
                M2 = np.zeros((k + 1, k + 1))
                M2[:k, :k] = sub
                M2[:k, k] = -1
                M2[k, :k] = 1
                try:
                    sol_y = np.linalg.solve(M2, rhs)
                except np.linalg.LinAlgError:
                    continue
                xs, ys = sol_x[:k], sol_y[:k]
                if xs.min() < -1e-12 or ys.min() < -1e-12:
                    continue
                x = np.zeros(m)
                y = np.zeros(n)
                x[list(rows)] = xs
                y[list(cols)] = ys
                v = x @ A @ y
                if (A @ y).max() <= v + 1e-9 and (x @ A).min() >= v - 1e-9:
                    return v, x, y
    raise RuntimeError("no equilibrium found")


def grid_hull_distance(points, x, steps=400):
    """Squared distance from x to conv(points) for one or two points, by grid
    search over the mixing weight followed by a local ternary refinement."""
    P = np.asarray(points, dtype=float)
    x = np.asarray(x, dtype=float)
    k = len(P)
    best = np.inf
    best_w = None
    if k == 1:
        return float(np.sum((P[0] - x) ** 2))
    grid = np.linspace(0.0, 1.0, steps + 1)
    if k == 2:
        for a in grid:
            d = np.sum((a * P[0] + (1 - a) * P[1] - x) ** 2)
            if d < best:
                best, best_w = d, a
        lo, hi = max(0.0, best_w - 1.0 / steps), min(1.0, best_w + 1.0 / steps)
        for _ in range(200):
            a1 = lo + (hi - lo) / 3
            a2 = hi - (hi - lo) / 3
            d1 = np.sum((a1 * P[0] + (1 - a1) * P[1] - x) ** 2)
            d2 = np.sum((a2 * P[0] + (1 - a2) * P[1] - x) ** 2)
            if d1 < d2:
                hi = a2
            else:
                lo = a1
        a = (lo + hi) / 2
        return float(min(best, np.sum((a * P[0] + (1 - a) * P[1] - x) ** 2)))
    raise ValueError("grid oracle supports at most two hull points")
