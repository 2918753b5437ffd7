"""Exact utilities, sampled episodes, best responses and exploitability."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import EmptyMixture, ProfileArityMismatch, UnsupportedPlayerCount
from .base import CHANCE, TERMINAL, GameSpec, new_initial_state
from .policy import BehavioralPolicy
from .tree import GameTree, game_tree

# relative tolerance under which two action values count as tied
TIE_TOL = 1e-12


def _check_profile(game: GameSpec, profile):
    if len(profile) != game.num_players:
        raise ProfileArityMismatch(
            f"{game.game_id} has {game.num_players} players, profile has {len(profile)}"
        )


def _edge_probs(tree: GameTree, profile, skip=None) -> np.ndarray:
    """Probability of entering each node from its parent; ``skip``'s edges are 1."""
    probs = tree.chance_prob.copy()
    for p, policy in enumerate(profile):
        if p == skip:
            continue
        edges = tree.owned_edges[p]
        probs[edges] = policy.flat(tree, p)[tree.edge_seq[edges]]
    return probs


def _reach(tree: GameTree, edge_probs: np.ndarray) -> np.ndarray:
    reach = np.empty_like(edge_probs)
    reach[..., 0] = 1.0
    for sl in tree.level[1:]:
        reach[..., sl] = reach[..., tree.parent[sl]] * edge_probs[..., sl]
    return reach


def expected_utility(game: GameSpec, profile: Sequence[BehavioralPolicy]) -> np.ndarray:
    """Exact expected return of every player by full tree traversal."""
    _check_profile(game, profile)
    tree = game_tree(game)
    reach = _reach(tree, _edge_probs(tree, profile))
    values = reach[tree.terminals] @ tree.terminal_returns
    if game.num_players == 2:
        values[1] = -values[0]
    return values


def seat_averaged_payoff(game: GameSpec, a: BehavioralPolicy, b: BehavioralPolicy) -> float:
    """Symmetrized payoff of both-seat policy ``a`` against ``b``."""
    return 0.5 * (expected_utility(game, [a, b])[0] - expected_utility(game, [b, a])[0])


def simulate_episode(game: GameSpec, profile: Sequence[BehavioralPolicy], rng: np.random.Generator) -> np.ndarray:
    """Sample one terminal trajectory and return its per-player returns."""
    _check_profile(game, profile)
    state = new_initial_state(game)
    while True:
        p = state.current_player()
        if p == TERMINAL:
            return np.asarray(state.returns(), dtype=float)
        if p == CHANCE:
            u = rng.random()
            c = 0.0
            outcomes = state.chance_outcomes()
            action = outcomes[-1][0]
            for a, prob in outcomes:
                c += prob
                if u < c:
                    action = a
                    break
            state = state.child(action)
            continue
        legal = state.legal_actions()
        state = state.child(profile[p].sample(state.info_key(p), legal, rng.random()))


def _normalize_mixture(game: GameSpec, player: int, mixture):
    if len(mixture) == 0:
        raise EmptyMixture("opponent mixture is empty")
    weights = np.asarray([w for w, _ in mixture], dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError("mixture weights must be non-negative and sum to 1")
    profiles = []
    for _, prof in mixture:
        if isinstance(prof, BehavioralPolicy):
            prof = [prof] * game.num_players
        _check_profile(game, prof)
        profiles.append(prof)
    return weights, profiles


def exact_best_response(game: GameSpec, player: int, opponent_mixture):
    """Best response of ``player`` to a weighted list of opponent profiles.

    ``opponent_mixture`` holds ``(weight, profile)`` pairs; a profile is a list with
    one policy per seat (the entry for ``player`` is ignored) or a single both-seat
    policy. Returns ``(policy, value)`` where the pure policy covers every
    information state of ``player`` and ties go to the lowest action position.
    """
    weights, profiles = _normalize_mixture(game, player, opponent_mixture)
    tree = game_tree(game)
    mix_reach = np.zeros(tree.num_nodes)
    for w, prof in zip(weights, profiles):
        if w == 0.0:
            continue
        mix_reach += w * _reach(tree, _edge_probs(tree, prof, skip=player))

    value = np.zeros(tree.num_nodes)
    value[tree.terminals] = mix_reach[tree.terminals] * tree.terminal_returns[:, player]
    chosen = np.zeros(tree.num_sequences[player])
    table = {}
    infos_by_depth = {}
    for info in tree.infosets[player]:
        infos_by_depth.setdefault(info.depth, []).append(info)

    for d in range(tree.max_depth - 1, -1, -1):
        children = np.arange(tree.level[d + 1].start, tree.level[d + 1].stop)
        if len(children) == 0:
            continue
        par = tree.parent[children]
        own = tree.parent_player[children] == player
        if d in infos_by_depth:
            seqval = np.bincount(
                tree.edge_seq[children[own]], weights=value[children[own]],
                minlength=tree.num_sequences[player],
            )
            for info in infos_by_depth[d]:
                vals = seqval[info.seq_start:info.seq_start + info.num_actions]
                best = vals.max()
                pos = int(np.flatnonzero(vals >= best - TIE_TOL * (1.0 + abs(best)))[0])
                chosen[info.seq_start + pos] = 1.0
                probs = np.zeros(info.num_actions)
                probs[pos] = 1.0
                table[info.key] = probs
        w = np.where(own, chosen[tree.edge_seq[children]], 1.0)
        lo = tree.level[d].start
        value[tree.level[d]] += np.bincount(
            par - lo, weights=w * value[children], minlength=tree.level[d].stop - lo
        )
    return BehavioralPolicy(table, name=f"br{player}"), float(value[0])


def _as_per_player(game, meta, windows):
    n = game.num_players
    if isinstance(windows, (list, tuple)) and windows and isinstance(windows[0], BehavioralPolicy):
        windows = [list(windows)] * n
    if not isinstance(meta, (list, tuple)) or (len(meta) and np.isscalar(meta[0])):
        meta = [meta] * n
    return [np.asarray(getattr(m, "weights", m), dtype=float) for m in meta], windows


def mixture_against(game, weights, window, seat):
    """Opponent mixture in which seat ``seat`` plays ``window`` according to ``weights``."""
    return [(float(w), [pol] * game.num_players) for w, pol in zip(weights, window) if w > 0]


def nash_conv(game: GameSpec, meta, windows) -> float:
    if game.num_players != 2:
        raise UnsupportedPlayerCount("exploitability is defined for 2-player games only")
    metas, wins = _as_per_player(game, meta, windows)
    total = 0.0
    for player in range(2):
        opp = 1 - player
        mix = mixture_against(game, metas[opp] / metas[opp].sum(), wins[opp], opp)
        total += exact_best_response(game, player, mix)[1]
    return total


def exploitability(game: GameSpec, meta, windows) -> float:
    """Half the NashConv of the meta-strategy mixture over the window(s).

    ``meta`` is one weight vector (shared by both seats) or one per seat; ``windows``
    is one list of both-seat policies or one list per seat.
    """
    return max(0.0, 0.5 * nash_conv(game, meta, windows))
