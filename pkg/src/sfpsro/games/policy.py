"""Behavioral policies and their sequence-form views."""
from __future__ import annotations

from typing import Mapping

import numpy as np

from ..errors import MissingPolicyEntry
from .tree import GameTree

FALLBACKS = (None, "uniform", "first")


class BehavioralPolicy:
    """Map from information-state key to a distribution over legal actions.

    ``fallback`` fills keys absent from ``table``: ``"uniform"`` plays uniformly,
    ``"first"`` plays the lowest legal action (the greedy choice of an untouched
    zero-initialized value table), ``None`` raises :class:`MissingPolicyEntry`.
    Instances are treated as immutable; flat views are cached per tree.
    """

    __slots__ = ("table", "fallback", "name", "_flat_cache")

    def __init__(self, table: Mapping[str, np.ndarray] | None = None, fallback=None, name=""):
        if fallback not in FALLBACKS:
            raise ValueError(f"unknown fallback {fallback!r}")
        self.table = {k: np.asarray(v, dtype=float) for k, v in (table or {}).items()}
        self.fallback = fallback
        self.name = name
        self._flat_cache = {}

    def __repr__(self):
        return f"BehavioralPolicy({self.name or len(self.table)!r}, fallback={self.fallback!r})"

    def action_probs(self, key: str, num_actions: int) -> np.ndarray:
        probs = self.table.get(key)
        if probs is not None:
            if len(probs) != num_actions:
                raise ValueError(f"{key!r}: expected {num_actions} probabilities, got {len(probs)}")
            return probs
        if self.fallback == "uniform":
            return np.full(num_actions, 1.0 / num_actions)
        if self.fallback == "first":
            out = np.zeros(num_actions)
            out[0] = 1.0
            return out
        raise MissingPolicyEntry(key)

    def flat(self, tree: GameTree, player: int) -> np.ndarray:
        """Per-sequence action probabilities for ``player`` (entry 0 is 1)."""
        cache_key = (id(tree), player)
        vec = self._flat_cache.get(cache_key)
        if vec is None:
            vec = np.ones(tree.num_sequences[player])
            for info in tree.infosets[player]:
                vec[info.seq_start:info.seq_start + info.num_actions] = self.action_probs(
                    info.key, info.num_actions
                )
            self._flat_cache[cache_key] = vec
        return vec

    def sample(self, key: str, legal: list, u: float) -> int:
        probs = self.action_probs(key, len(legal))
        c = 0.0
        for a, p in zip(legal, probs):
            c += p
            if u < c:
                return a
        # float round-off: last action with positive probability
        for a, p in zip(reversed(legal), probs[::-1]):
            if p > 0:
                return a
        return legal[-1]


def uniform_policy(name="uniform") -> BehavioralPolicy:
    return BehavioralPolicy({}, fallback="uniform", name=name)


def pure_policy(choices: Mapping[str, int], tree: GameTree, name="") -> BehavioralPolicy:
    """Deterministic policy from ``key -> action position``; missing keys play position 0."""
    table = {}
    for infos in tree.infosets:
        for info in infos:
            probs = np.zeros(info.num_actions)
            probs[choices.get(info.key, 0)] = 1.0
            table[info.key] = probs
    return BehavioralPolicy(table, name=name)


def matrix_strategy(game_tree: GameTree, action: int, name="") -> BehavioralPolicy:
    """Pure strategy of a symmetric matrix game, played identically in both seats."""
    return pure_policy({"p0|": action, "p1|": action}, game_tree, name=name or f"a{action}")


def policy_from_flat(tree: GameTree, flats: list, name="") -> BehavioralPolicy:
    table = {}
    for p, vec in enumerate(flats):
        for info in tree.infosets[p]:
            table[info.key] = np.array(vec[info.seq_start:info.seq_start + info.num_actions])
    return BehavioralPolicy(table, name=name)


def realization_vector(tree: GameTree, player: int, policy: BehavioralPolicy) -> np.ndarray:
    """Sequence-form reach probabilities of ``player``'s own actions."""
    probs = policy.flat(tree, player)
    out = np.empty_like(probs)
    out[0] = 1.0
    parent = tree.sequence_parent(player)
    for seqs in tree.infoset_depth_levels(player):
        out[seqs] = out[parent[seqs]] * probs[seqs]
    return out


def joint_realization(tree: GameTree, policy: BehavioralPolicy) -> np.ndarray:
    """Concatenation of the seat realization vectors of a both-seat policy."""
    return np.concatenate(
        [realization_vector(tree, p, policy) for p in range(tree.game.num_players)]
    )
