"""Closed-form game-simulation cost accounting for PSRO meta-payoff filling."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import CountOverflow

# counts must stay representable as signed 64-bit integers for CSV consumers
COUNT_LIMIT = 2**63 - 1


def _check(value: int) -> int:
    if value > COUNT_LIMIT:
        raise CountOverflow(f"simulation count {value} exceeds {COUNT_LIMIT}")
    return value


def gs_count(M: int, N: int, K: int) -> int:
    """Simulations needed to fill the new profiles after the M-th strategy joins.

    Every profile involving at least one player's newest strategy is new:
    ``(M**N - (M - 1)**N) * K``.
    """
    for name, v, lo in (("M", M, 1), ("N", N, 2), ("K", K, 1)):
        if int(v) != v or v < lo:
            raise ValueError(f"{name} must be an integer >= {lo}, got {v}")
    M, N, K = int(M), int(N), int(K)
    new_profiles = _check(_check(M**N) - (M - 1) ** N)
    return _check(new_profiles * K)


@dataclass(frozen=True)
class CostRow:
    iteration: int
    gs_sims: int
    brs_episodes: int

    @property
    def gs_fraction(self) -> float:
        total = self.gs_sims + self.brs_episodes
        return self.gs_sims / total if total else 0.0


def cumulative_breakdown(iterations: int, players: int, K: int, episodes_per_br: int) -> list[CostRow]:
    """Per-iteration GS count at ``M = iteration`` against a fixed BR budget per player."""
    if iterations < 1 or episodes_per_br < 1:
        raise ValueError("iterations and episodes_per_br must be positive")
    brs = _check(episodes_per_br * players)
    return [CostRow(m, gs_count(m, players, K), brs) for m in range(1, iterations + 1)]
