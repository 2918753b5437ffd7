"""Meta-strategy solvers over a strategy window.

Zero-sum Nash by regret matching+ (with a verified support polish), uniform and
last-added meta-strategies, and the exponential-weights update driven by
per-slot outcome buffers.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.optimize import lsq_linear

from .errors import ConvergenceError, EmptyWindow, InvalidOutcome, ShapeError, SlotError
from .kernels import rm_plus_bimatrix, rm_plus_symmetric

DEFAULT_TOL = 1e-6
MAX_ITER = 100_000
SUPPORT_THRESHOLD = 1e-4
BUFFER_CAPACITY = 1000
_STAGES = (1_000, 10_000, 100_000)
_CHECK_EVERY = 16


@dataclass(frozen=True)
class MetaStrategy:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or len(w) == 0:
            raise EmptyWindow("meta-strategy needs at least one slot")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"invalid meta-strategy weights {w}")
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True)
class NashSolution:
    strategy: np.ndarray
    value: float
    residual: float
    column_strategy: np.ndarray | None = None


def _is_antisymmetric(P):
    return P.shape[0] == P.shape[1] and np.allclose(P, -P.T, rtol=0.0, atol=1e-12)


def _symmetric_residual(P, x):
    u = P @ x
    return float(u.max() - x @ u)


def _nnls(M, rhs):
    # bounded-variable least squares; scipy 1.15's nnls can return wrong solutions
    res = lsq_linear(M, rhs, bounds=(0.0, np.inf), method="bvls", tol=1e-14)
    # bvls may step a hair below its bound
    return np.maximum(res.x, 0.0) if res.status >= 0 else None


def _polish_symmetric(P):
    """Equilibrium as a non-negative solution of ``P x + s = 0, sum x = 1``."""
    n = P.shape[0]
    scale = max(1.0, float(np.abs(P).max()))
    M = np.zeros((n + 1, 2 * n))
    M[:n, :n] = P
    M[:n, n:] = np.eye(n)
    M[n, :n] = scale
    rhs = np.zeros(n + 1)
    rhs[n] = scale
    sol = _nnls(M, rhs)
    if sol is None or sol[:n].sum() <= 0:
        return None
    x = sol[:n] / sol[:n].sum()
    return x, _symmetric_residual(P, x)


def _gap(A, x, y):
    return float((A @ y).max() - (x @ A).min())


def _polish_bimatrix(A):
    """Equilibrium as a non-negative solution of the primal-dual feasibility system.

    Unknowns ``x, y, w, s, t >= 0`` with ``B y + s = w``, ``B^T x - t = w`` and both
    strategies summing to one, where ``B`` is ``A`` shifted to be positive so that
    the common value ``w`` is non-negative.
    """
    m, n = A.shape
    B = A + (1.0 - A.min())
    scale = max(1.0, float(np.abs(B).max()))
    cols = m + n + 1 + n + m
    M = np.zeros((n + m + 2, cols))
    xs, ys, w = slice(0, m), slice(m, m + n), m + n
    # rows 0..m-1: B y + s - w = 0
    M[:m, ys] = B
    M[:m, w] = -1.0
    M[:m, m + n + 1 + n:] = np.eye(m)
    # rows m..m+n-1: B^T x - t - w = 0
    M[m:m + n, xs] = B.T
    M[m:m + n, w] = -1.0
    M[m:m + n, m + n + 1:m + n + 1 + n] = -np.eye(n)
    M[m + n, xs] = scale
    M[m + n + 1, ys] = scale
    rhs = np.zeros(n + m + 2)
    rhs[m + n:] = scale
    sol = _nnls(M, rhs)
    if sol is None or sol[xs].sum() <= 0 or sol[ys].sum() <= 0:
        return None
    x = sol[xs] / sol[xs].sum()
    y = sol[ys] / sol[ys].sum()
    return x, y, _gap(A, x, y)


def solve_matrix_game(A, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER):
    """Equilibrium ``(x, y, value, gap)`` of the zero-sum game A (row maximizes)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or 0 in A.shape:
        raise ShapeError(f"expected a non-empty 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("payoff matrix must be finite")
    if tol <= 0:
        raise ValueError("tol must be positive")
    best = None
    for cap in _STAGES:
        cap = min(cap, max_iter)
        x, y, gap, _ = rm_plus_bimatrix(A, cap, tol, _CHECK_EVERY)
        cand = (x, y, gap)
        if gap > 0:
            polished = _polish_bimatrix(A)
            if polished is not None and polished[2] < gap:
                cand = polished
        if best is None or cand[2] < best[2]:
            best = cand
        if best[2] <= tol or cap >= max_iter:
            break
    x, y, gap = best
    if gap > tol:
        raise ConvergenceError(
            f"matrix game solver stopped at gap {gap:.3g} > {tol:g}", residual=gap
        )
    return x, y, float(x @ A @ y), gap


def solve_zero_sum_nash(payoff, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> NashSolution:
    """Equilibrium of the symmetric zero-sum game with square payoff matrix ``payoff``.

    Antisymmetric inputs are solved by self-play and return a symmetric strategy
    with value 0; other square matrices fall back to the two-sided solver.
    """
    P = np.asarray(payoff, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
        raise ShapeError(f"expected a non-empty square matrix, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise ValueError("payoff matrix must be finite")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = P.shape[0]
    if n == 1:
        return NashSolution(np.ones(1), float(P[0, 0]), 0.0, np.ones(1))
    if not _is_antisymmetric(P):
        x, y, value, gap = solve_matrix_game(P, tol, max_iter)
        return NashSolution(x, value, gap, y)

    best = None
    for cap in _STAGES:
        cap = min(cap, max_iter)
        x, res, _ = rm_plus_symmetric(P, cap, tol, _CHECK_EVERY)
        cand = (x, res)
        if res > 0:
            polished = _polish_symmetric(P)
            if polished is not None and polished[1] < res:
                cand = polished
        if best is None or cand[1] < best[1]:
            best = cand
        if best[1] <= tol or cap >= max_iter:
            break
    x, res = best
    if res > tol:
        raise ConvergenceError(
            f"Nash solver stopped at residual {res:.3g} > {tol:g}", residual=res
        )
    return NashSolution(x, float(x @ P @ x), max(res, 0.0), x)


def support(strategy, threshold: float = SUPPORT_THRESHOLD) -> np.ndarray:
    """Indices carrying more than ``threshold`` probability."""
    s = np.flatnonzero(np.asarray(strategy) > threshold)
    if len(s) == 0:
        s = np.array([int(np.argmax(strategy))])
    return s


def mss_uniform(window_size: int) -> MetaStrategy:
    if window_size < 1:
        raise EmptyWindow("window is empty")
    return MetaStrategy(np.full(window_size, 1.0 / window_size))


def mss_last(window_size: int, ages=None) -> MetaStrategy:
    """Point mass on the newest slot: the last one, or the largest insertion age."""
    if window_size < 1:
        raise EmptyWindow("window is empty")
    w = np.zeros(window_size)
    w[int(np.argmax(ages)) if ages is not None else window_size - 1] = 1.0
    return MetaStrategy(w)


class OutcomeBuffer:
    """Per-slot ring buffers of the most recent outcomes, one slot per window entry."""

    def __init__(self, num_slots: int = 0, capacity: int = BUFFER_CAPACITY):
        self.capacity = capacity
        self._slots = [deque(maxlen=capacity) for _ in range(num_slots)]

    def __len__(self):
        return len(self._slots)

    def add_slot(self):
        self._slots.append(deque(maxlen=self.capacity))

    def remove_slot(self, slot: int):
        if not 0 <= slot < len(self._slots):
            raise SlotError(f"slot {slot} out of range for {len(self._slots)} slots")
        del self._slots[slot]

    def reset(self):
        for d in self._slots:
            d.clear()

    def count(self, slot: int) -> int:
        return len(self._slots[slot])

    def contents(self, slot: int) -> list:
        return list(self._slots[slot])

    def mean(self, slot: int) -> float:
        d = self._slots[slot]
        # empty slots sit at the neutral midpoint of an antisymmetric payoff
        return math.fsum(d) / len(d) if d else 0.0

    def means(self) -> np.ndarray:
        return np.array([self.mean(i) for i in range(len(self._slots))])


def record_outcome(buffer: OutcomeBuffer, slot: int, outcome: float) -> OutcomeBuffer:
    if not 0 <= slot < len(buffer):
        raise SlotError(f"slot {slot} out of range for {len(buffer)} slots")
    if not math.isfinite(outcome):
        raise InvalidOutcome(f"outcome {outcome!r} is not finite")
    buffer._slots[slot].append(float(outcome))
    return buffer


def hedge_update(buffer, eta: float) -> MetaStrategy:
    """Exponential weights ``exp(eta * S_i) / sum_j exp(eta * S_j)`` over slot means.

    ``buffer`` is an :class:`OutcomeBuffer` or an array of mean outcomes.
    """
    if eta < 0:
        raise ValueError("eta must be non-negative")
    S = buffer.means() if isinstance(buffer, OutcomeBuffer) else np.asarray(buffer, dtype=float)
    if len(S) == 0:
        raise EmptyWindow("no slots to weight")
    if np.any(np.isnan(S)):
        raise InvalidOutcome("NaN slot mean")
    z = eta * S
    z = np.exp(z - z.max())
    return MetaStrategy(z / z.sum())
