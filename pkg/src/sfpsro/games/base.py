"""Game specifications and the minimal state protocol every game implements.

States are immutable. Simultaneous moves are sequentialized: the later bidders of a
round act without observing the earlier bids of that round, which keeps every game
a perfect-recall extensive-form game.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

TERMINAL = -1
CHANCE = -2

GAME_IDS = ("matrix", "kuhn_poker", "leduc_poker", "goofspiel")


@dataclass(frozen=True)
class GameSpec:
    game_id: str
    num_players: int = 2
    params: tuple = field(default=())

    def __post_init__(self):
        if self.game_id not in GAME_IDS:
            raise ValueError(f"unknown game_id {self.game_id!r}")
        if self.num_players < 2:
            raise ValueError("num_players must be >= 2")
        if self.game_id == "goofspiel":
            if self.num_players not in (2, 3):
                raise ValueError("goofspiel supports 2 or 3 players")
        elif self.num_players != 2:
            raise ValueError(f"{self.game_id} is a 2-player game")
        if self.game_id == "matrix":
            P = np.asarray(self.param("payoff"), dtype=float)
            if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
                raise ValueError("matrix game needs a non-empty square payoff matrix")
            if not np.array_equal(P, -P.T):
                raise ValueError("matrix game payoff must be antisymmetric")

    def param(self, name: str, default: Any = None) -> Any:
        return dict(self.params).get(name, default)

    @property
    def payoff_matrix(self) -> np.ndarray:
        return np.asarray(self.param("payoff"), dtype=float)


def matrix_game(payoff) -> GameSpec:
    P = np.asarray(payoff, dtype=float)
    rows = tuple(tuple(float(v) for v in row) for row in P)
    return GameSpec("matrix", 2, (("payoff", rows),))


def kuhn_poker() -> GameSpec:
    return GameSpec("kuhn_poker", 2)


def leduc_poker() -> GameSpec:
    return GameSpec("leduc_poker", 2)


def goofspiel(num_cards: int = 5, num_players: int = 2) -> GameSpec:
    return GameSpec(
        "goofspiel",
        num_players,
        (("num_cards", int(num_cards)), ("points_order", "descending")),
    )


RPS = ((0.0, -1.0, 1.0), (1.0, 0.0, -1.0), (-1.0, 1.0, 0.0))


def rock_paper_scissors() -> GameSpec:
    return matrix_game(RPS)


def new_initial_state(game: GameSpec):
    if game.game_id == "matrix":
        from .matrix import MatrixState

        return MatrixState.initial(game.payoff_matrix)
    if game.game_id == "kuhn_poker":
        from .kuhn import KuhnState

        return KuhnState.initial()
    if game.game_id == "leduc_poker":
        from .leduc import LeducState

        return LeducState.initial()
    from .goofspiel_rules import GoofspielState

    return GoofspielState.initial(game.param("num_cards", 5), game.num_players)


def payoff_range(game: GameSpec) -> tuple[float, float]:
    if game.game_id == "matrix":
        P = game.payoff_matrix
        return float(P.min()), float(P.max())
    if game.game_id == "kuhn_poker":
        return -2.0, 2.0
    if game.game_id == "leduc_poker":
        # ante 1 + two raises of 2 + two raises of 4
        return -13.0, 13.0
    return -1.0, 1.0
