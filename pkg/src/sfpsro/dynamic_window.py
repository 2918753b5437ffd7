"""Fixed-capacity strategy window over a sketchy antisymmetric payoff matrix.

A new strategy is filled in from the outcomes its training produced, the
population is layered by repeatedly peeling off the support of the restricted
equilibrium, and once the window overflows the lowest-weight member of the last
layer is dropped.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, IncompleteOutcomes, InvalidOutcome, SlotError
from .meta_solvers import DEFAULT_TOL, SUPPORT_THRESHOLD, solve_matrix_game, solve_zero_sum_nash, support

DEFAULT_CAPACITY = 30
# equilibrium weights closer than this count as equal when choosing whom to evict
WEIGHT_TIE_TOL = 1e-9


@dataclass
class StrategyWindow:
    """Ordered slots of ``(policy, insertion_age)``; ages increase with slot order."""

    capacity: int = DEFAULT_CAPACITY
    policies: list = field(default_factory=list)
    ages: list = field(default_factory=list)
    next_age: int = 0

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("window capacity must be positive")

    def __len__(self):
        return len(self.policies)

    def __getitem__(self, slot):
        return self.policies[slot]

    def __iter__(self):
        return iter(self.policies)

    def insert(self, policy) -> int:
        """Append ``policy`` as the newest slot and return its age.

        Occupancy may exceed capacity by one until the caller eliminates.
        """
        age = self.next_age
        self.policies.append(policy)
        self.ages.append(age)
        self.next_age += 1
        return age

    def copy(self) -> "StrategyWindow":
        return StrategyWindow(self.capacity, list(self.policies), list(self.ages), self.next_age)

    @property
    def overflowing(self) -> bool:
        return len(self.policies) > self.capacity


@dataclass(frozen=True)
class SketchyPayoffMatrix:
    """Running-mean payoffs of row slot vs column slot, with sample counts."""

    values: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    counts: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.int64))

    def __len__(self):
        return self.values.shape[0]

    def check(self, tol: float = 0.0):
        V = self.values
        if V.shape[0] != V.shape[1] or self.counts.shape != V.shape:
            raise ValueError("sketchy matrix is not square")
        if np.any(np.abs(V + V.T) > tol) or np.any(np.diag(V) != 0.0):
            raise ValueError("sketchy matrix is not antisymmetric with zero diagonal")
        if np.any(self.counts != self.counts.T):
            raise ValueError("sample counts are not symmetric")


def fill(P: SketchyPayoffMatrix, new_slot_outcomes, counts=None, payoff_range=None) -> SketchyPayoffMatrix:
    """Append the new strategy's row of mean outcomes and its negated column.

    ``new_slot_outcomes[i]`` is the new strategy's mean outcome against active slot
    ``i``; ``counts`` optionally gives the number of samples behind each mean.
    """
    n = len(P)
    means = np.asarray(new_slot_outcomes, dtype=float)
    if means.shape != (n,) or np.any(np.isnan(means)):
        raise IncompleteOutcomes(f"need {n} slot means, got {means.tolist()}")
    if not np.all(np.isfinite(means)):
        raise InvalidOutcome("slot means must be finite")
    if payoff_range is not None:
        lo, hi = payoff_range
        bad = (means < lo) | (means > hi)
        if np.any(bad):
            raise InvalidOutcome(f"slot means {means[bad].tolist()} outside [{lo}, {hi}]")
    c = np.zeros(n, dtype=np.int64) if counts is None else np.asarray(counts, dtype=np.int64)
    if c.shape != (n,) or np.any(c < 0):
        raise IncompleteOutcomes(f"need {n} non-negative sample counts")
    V = np.zeros((n + 1, n + 1))
    V[:n, :n] = P.values
    V[n, :n] = means
    V[:n, n] = -means
    # negating 0.0 yields -0.0; keep zeros sign-clean for dumps
    V[V == 0.0] = 0.0
    C = np.zeros((n + 1, n + 1), dtype=np.int64)
    C[:n, :n] = P.counts
    C[n, :n] = c
    C[:n, n] = c
    return SketchyPayoffMatrix(V, C)


@dataclass(frozen=True)
class Cluster:
    slots: tuple
    weights: np.ndarray


@dataclass(frozen=True)
class NashClusteringResult:
    clusters: list

    def __len__(self):
        return len(self.clusters)

    def layer_of(self, slot) -> int:
        for i, c in enumerate(self.clusters):
            if slot in c.slots:
                return i
        raise SlotError(f"slot {slot} is in no cluster")


def nash_clustering(P, tol: float = DEFAULT_TOL, threshold: float = SUPPORT_THRESHOLD) -> NashClusteringResult:
    """Layered partition: each layer is the equilibrium support of the slots left over."""
    V = P.values if isinstance(P, SketchyPayoffMatrix) else np.asarray(P, dtype=float)
    remaining = np.arange(V.shape[0])
    clusters = []
    while len(remaining):
        sub = V[np.ix_(remaining, remaining)]
        try:
            sol = solve_zero_sum_nash(sub, tol)
        except ConvergenceError as exc:
            raise ConvergenceError(
                f"layer {len(clusters)}: {exc}", residual=exc.residual, layer=len(clusters)
            ) from exc
        supp = support(sol.strategy, threshold)
        w = sol.strategy[supp]
        clusters.append(Cluster(tuple(int(s) for s in remaining[supp]), w / w.sum()))
        remaining = np.delete(remaining, supp)
    return NashClusteringResult(clusters)


def select_elimination(clustering: NashClusteringResult, window=None) -> int:
    """Minimum-weight slot of the last layer; near-ties go to the oldest slot.

    ``window`` is a :class:`StrategyWindow` or a plain sequence of slot ages.
    """
    if len(clustering) == 0:
        raise ValueError("empty clustering")
    last = clustering.clusters[-1]
    if len(last.slots) == 0:
        raise ValueError("malformed clustering: empty layer")
    ages = getattr(window, "ages", window)
    lowest = float(np.min(last.weights))
    tied = [s for s, w in zip(last.slots, last.weights) if w <= lowest + WEIGHT_TIE_TOL]
    if ages is None:
        return min(tied)
    return min(tied, key=lambda s: (ages[s], s))


def eliminate(P: SketchyPayoffMatrix, window: StrategyWindow, slot: int):
    """Drop ``slot`` from both the matrix and the window; returns new copies."""
    if not 0 <= slot < len(window) or len(window) != len(P):
        raise SlotError(f"slot {slot} out of range for occupancy {len(window)}")
    keep = np.delete(np.arange(len(P)), slot)
    newP = SketchyPayoffMatrix(P.values[np.ix_(keep, keep)].copy(), P.counts[np.ix_(keep, keep)].copy())
    w = window.copy()
    del w.policies[slot]
    del w.ages[slot]
    return newP, w


def rpp(P_AB, tol: float = DEFAULT_TOL) -> float:
    """Value of the population-vs-population zero-sum game (rows maximize)."""
    x, y, value, _ = solve_matrix_game(np.asarray(P_AB, dtype=float), tol)
    return float(x @ np.asarray(P_AB, dtype=float) @ y)


def cluster_rpps(values, clustering: NashClusteringResult, tol: float = DEFAULT_TOL) -> list:
    """RPP of each layer against the next one, on the restricted rectangular matrix."""
    V = np.asarray(getattr(values, "values", values), dtype=float)
    out = []
    for a, b in zip(clustering.clusters, clustering.clusters[1:]):
        out.append(rpp(V[np.ix_(a.slots, b.slots)], tol))
    return out


def write_matrix_csv(path, values, ages):
    """Row-major dump with a header row of slot ages."""
    V = np.asarray(getattr(values, "values", values), dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([str(a) for a in ages])
        for row in V:
            w.writerow([repr(float(v)) for v in row])


def read_matrix_csv(path):
    """Inverse of :func:`write_matrix_csv`; returns ``(matrix, ages)``."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    try:
        ages = [int(a) for a in rows[0]]
        V = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(len(rows) - 1, -1)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc
    if V.shape != (len(ages), len(ages)):
        raise ValueError(f"{path}: expected {len(ages)}x{len(ages)} matrix, got {V.shape}")
    if not np.all(np.isfinite(V)):
        raise ValueError(f"{path}: non-finite entries")
    return V, ages


def is_antisymmetric(V, tol: float) -> bool:
    V = np.asarray(V, dtype=float)
    return V.shape[0] == V.shape[1] and bool(np.all(np.abs(V + V.T) <= tol)) and not math.isnan(V.sum())
