"""Small zero-sum games, behavioral policies and exact evaluation."""
from .base import (
    CHANCE,
    TERMINAL,
    GameSpec,
    goofspiel,
    kuhn_poker,
    leduc_poker,
    matrix_game,
    new_initial_state,
    payoff_range,
    rock_paper_scissors,
)
from .evaluation import (
    exact_best_response,
    expected_utility,
    exploitability,
    nash_conv,
    seat_averaged_payoff,
    simulate_episode,
)
from .policy import (
    BehavioralPolicy,
    joint_realization,
    matrix_strategy,
    policy_from_flat,
    pure_policy,
    realization_vector,
    uniform_policy,
)
from .tree import GameTree, game_tree

__all__ = [
    "CHANCE", "TERMINAL", "GameSpec", "goofspiel", "kuhn_poker", "leduc_poker",
    "matrix_game", "new_initial_state", "payoff_range", "rock_paper_scissors",
    "exact_best_response", "expected_utility", "exploitability", "nash_conv",
    "seat_averaged_payoff", "simulate_episode", "BehavioralPolicy", "joint_realization",
    "matrix_strategy", "policy_from_flat", "pure_policy", "realization_vector",
    "uniform_policy", "GameTree", "game_tree",
]
