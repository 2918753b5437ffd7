"""Best-response solvers: exact oracle, tabular sampled learner, diversity bonus.

The learner trains one both-seat policy. Each episode samples an opponent slot from
the smoothed meta-strategy ``(1 - eps_mix) * sigma + eps_mix * uniform``, plays one
seat, and applies tabular Q-learning backups (harmonic step size, epsilon-greedy
behaviour). With ``diversity_weight > 0`` the terminal reward is shaped by the
marginal squared distance to the hull of the existing population's realization
vectors that each chosen action would create.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyWindow, InvalidBudget, ShapeError
from .games import (
    CHANCE,
    TERMINAL,
    BehavioralPolicy,
    GameSpec,
    exact_best_response,
    game_tree,
    new_initial_state,
)
from .kernels import fw_simplex_qp

FW_MAX_ITER = 200
FW_GAP_TOL = 1e-8
DIVERSITY_REFRESH = 500
EPS_MIX = 0.1


def diversity_bonus(candidate, existing) -> float:
    """Squared Euclidean distance from ``candidate`` to the convex hull of ``existing``."""
    if len(existing) == 0:
        return 0.0
    V = np.asarray(existing, dtype=float)
    x = np.asarray(candidate, dtype=float)
    if V.ndim != 2 or x.ndim != 1 or V.shape[1] != x.shape[0]:
        raise ShapeError(f"dimension mismatch: candidate {x.shape}, existing {V.shape}")
    return _hull_distance(V @ V.T, V, x)


def _hull_distance(G, V, x):
    _, value, _ = fw_simplex_qp(G, V @ x, float(x @ x), FW_MAX_ITER, FW_GAP_TOL)
    return value


@dataclass
class LearnerState:
    """Tabular action values keyed by information state."""

    epsilon: float = 0.05
    gamma: float = 1.0
    q: dict = field(default_factory=dict)
    visits: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")

    def values(self, key, n):
        q = self.q.get(key)
        if q is None:
            q = self.q[key] = np.zeros(n)
            self.visits[key] = np.zeros(n, dtype=np.int64)
        return q

    def greedy_policy(self, name="") -> BehavioralPolicy:
        table = {}
        for key, q in self.q.items():
            probs = np.zeros(len(q))
            probs[int(np.argmax(q))] = 1.0
            table[key] = probs
        # unseen states: greedy on an all-zero row picks the first action
        return BehavioralPolicy(table, fallback="first", name=name)

    def snapshot(self):
        return (self.epsilon, self.gamma, sorted((k, v.tobytes()) for k, v in self.q.items()),
                sorted((k, v.tobytes()) for k, v in self.visits.items()))


def reset(learner: LearnerState) -> LearnerState:
    learner.q.clear()
    learner.visits.clear()
    return learner


class InteractionLog:
    """Outcomes of every training episode, grouped by opponent slot."""

    def __init__(self, num_slots: int):
        self.entries = [[] for _ in range(num_slots)]
        # episodes against an opponent outside the window (slot -1)
        self.external = []

    def __len__(self):
        return sum(len(e) for e in self.entries) + len(self.external)

    def add_slot(self):
        self.entries.append([])

    def record(self, slot, episode, outcome, seat):
        rows = self.external if slot == -1 else self.entries[slot]
        rows.append((episode, float(outcome), seat))

    def counts(self) -> np.ndarray:
        return np.array([len(e) for e in self.entries])

    def means(self, tail_fraction: float = 1.0) -> np.ndarray:
        """Seat-balanced mean outcome against each slot; NaN where unplayed.

        Only the last ``tail_fraction`` of each slot's episodes is used.
        """
        return np.array([_seat_mean(rows, tail_fraction) for rows in self.entries])

    def external_mean(self, tail_fraction: float = 1.0) -> float:
        return _seat_mean(self.external, tail_fraction)


def _seat_mean(rows, tail_fraction):
    if not rows:
        return math.nan
    rows = rows[len(rows) - max(1, math.ceil(tail_fraction * len(rows))):]
    per_seat = {}
    for _, outcome, seat in rows:
        per_seat.setdefault(seat, []).append(outcome)
    return math.fsum(math.fsum(v) / len(v) for v in per_seat.values()) / len(per_seat)


class OpponentSampler:
    """Draws opponent slots from ``(1 - eps_mix) * sigma + eps_mix * uniform``.

    The uniform share is realized deterministically: exactly every episode at which
    ``floor(e * eps_mix)`` increments takes the next slot of a shuffled cycle, so all
    slots are visited once ``budget * eps_mix`` reaches the window size.
    """

    def __init__(self, num_slots, eps_mix, rng):
        self.num_slots = num_slots
        self.eps_mix = eps_mix
        self.rng = rng
        self.episode = 0
        self._cycle = []

    def draw(self, sigma) -> int:
        """Next slot; with ``sigma=None`` the non-uniform share returns -1."""
        e = self.episode
        self.episode += 1
        if math.floor((e + 1) * self.eps_mix) > math.floor(e * self.eps_mix):
            if not self._cycle:
                self._cycle = list(self.rng.permutation(self.num_slots))
            return int(self._cycle.pop())
        if sigma is None:
            return -1
        u = self.rng.random()
        c = 0.0
        for i, w in enumerate(sigma):
            c += w
            if u < c:
                return i
        return int(np.flatnonzero(np.asarray(sigma) > 0)[-1])


class DiversityShaper:
    """Marginal hull-distance gain of every single-action deviation of a pure policy."""

    def __init__(self, game: GameSpec, existing_realizations):
        self.tree = game_tree(game)
        self.V = np.asarray(existing_realizations, dtype=float)
        self.G = self.V @ self.V.T
        self.gain = {}

    def _realization(self, flats):
        tree = self.tree
        parts = []
        for p, probs in enumerate(flats):
            out = np.empty_like(probs)
            out[0] = 1.0
            parent = tree.sequence_parent(p)
            for seqs in tree.infoset_depth_levels(p):
                out[seqs] = out[parent[seqs]] * probs[seqs]
            parts.append(out)
        return np.concatenate(parts)

    def refresh(self, policy: BehavioralPolicy):
        tree = self.tree
        flats = [policy.flat(tree, p).copy() for p in range(tree.game.num_players)]
        r = self._realization(flats)
        base = _hull_distance(self.G, self.V, r)
        offsets = np.cumsum([0] + [len(f) for f in flats])
        gain = {}
        for p, infos in enumerate(tree.infosets):
            probs = flats[p]
            for info in infos:
                sl = slice(info.seq_start, info.seq_start + info.num_actions)
                saved = probs[sl].copy()
                g = np.zeros(info.num_actions)
                if r[offsets[p] + info.parent_seq] == 0.0:
                    # unreachable: a deviation here leaves the realization unchanged
                    gain[info.key] = g
                    continue
                for a in range(info.num_actions):
                    if saved[a] == 1.0:
                        continue
                    probs[sl] = 0.0
                    probs[sl.start + a] = 1.0
                    g[a] = _hull_distance(self.G, self.V, self._realization(flats)) - base
                probs[sl] = saved
                gain[info.key] = g
        self.gain = gain
        return base


class BestResponseTrainer:
    """Sampled tabular best-response learner against a window of opponents."""

    def __init__(self, game: GameSpec, opponent_window, learner: LearnerState, rng,
                 eps_mix=EPS_MIX, diversity_weight=0.0, existing_realizations=(),
                 player=None, log=None):
        if len(opponent_window) == 0:
            raise EmptyWindow("opponent window is empty")
        if diversity_weight < 0:
            raise ValueError("diversity weight must be non-negative")
        self.game = game
        self.window = list(opponent_window)
        self.learner = learner
        self.rng = rng
        self.player = player
        self.sampler = OpponentSampler(len(self.window), eps_mix, rng)
        self.log = log if log is not None else InteractionLog(len(self.window))
        self.episodes = 0
        self.diversity_weight = diversity_weight
        self.shaper = None
        if diversity_weight > 0 and len(existing_realizations) > 0:
            self.shaper = DiversityShaper(game, existing_realizations)

    def policy(self, name="") -> BehavioralPolicy:
        return self.learner.greedy_policy(name=name)

    def run(self, episodes: int, sigma, opponent=None):
        """Play ``episodes`` training episodes against ``sigma`` over the window.

        With ``opponent`` given, ``sigma`` is ignored: that policy takes the
        ``1 - eps_mix`` share and the log attributes those episodes to slot ``-1``.
        Returns the ``(slot, outcome)`` pairs in play order.
        """
        if opponent is not None:
            sigma = None
        else:
            sigma = np.asarray(getattr(sigma, "weights", sigma), dtype=float)
            if sigma.shape != (len(self.window),):
                raise ShapeError(f"meta-strategy over {len(sigma)} slots, window has {len(self.window)}")
        outcomes = []
        for _ in range(episodes):
            if self.shaper is not None and self.episodes % DIVERSITY_REFRESH == 0:
                self.shaper.refresh(self.policy())
            slot = self.sampler.draw(sigma)
            seat = self.player if self.player is not None else self.episodes % self.game.num_players
            opp = self.window[slot] if slot >= 0 else opponent
            outcome = self._episode(seat, opp)
            self.log.record(slot, self.episodes, outcome, seat)
            outcomes.append((slot, outcome))
            self.episodes += 1
        return outcomes

    def _episode(self, seat, opponent: BehavioralPolicy) -> float:
        rng = self.rng
        learner = self.learner
        state = new_initial_state(self.game)
        trajectory = []
        while True:
            p = state.current_player()
            if p == TERMINAL:
                break
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
            key = state.info_key(p)
            if p == seat:
                q = learner.values(key, len(legal))
                if rng.random() < learner.epsilon:
                    pos = int(rng.integers(len(legal)))
                else:
                    pos = int(np.argmax(q))
                trajectory.append((key, pos))
                state = state.child(legal[pos])
            else:
                state = state.child(opponent.sample(key, legal, rng.random()))
        outcome = state.returns()[seat]
        reward = outcome
        if self.shaper is not None:
            gain = self.shaper.gain
            reward += self.diversity_weight * sum(
                gain[k][a] for k, a in trajectory if k in gain
            )
        # backward Q-learning sweep: terminal reward, max-backups in between
        target = reward
        for key, pos in reversed(trajectory):
            q = learner.q[key]
            n = learner.visits[key]
            n[pos] += 1
            q[pos] += (target - q[pos]) / (1.0 + n[pos])
            target = learner.gamma * q.max()
        return outcome


def train_best_response(game, player, opponent_window, sigma_opp, budget,
                        diversity_weight, existing_realizations, learner, rng,
                        eps_mix=EPS_MIX):
    """Train a tabular best response for ``budget`` episodes.

    ``player`` fixes the learner's seat; ``None`` alternates seats so the returned
    policy covers both. Returns ``(policy, log)``.
    """
    if budget < 1:
        raise InvalidBudget(f"budget must be >= 1, got {budget}")
    trainer = BestResponseTrainer(
        game, opponent_window, learner, rng, eps_mix=eps_mix,
        diversity_weight=diversity_weight, existing_realizations=existing_realizations,
        player=player,
    )
    trainer.run(budget, sigma_opp)
    return trainer.policy(), trainer.log


def exact_symmetric_response(game: GameSpec, window, sigma):
    """Both-seat exact best response to ``sigma`` over ``window``.

    Returns the merged policy and its seat-averaged value.
    """
    weights = np.asarray(getattr(sigma, "weights", sigma), dtype=float)
    if len(window) == 0:
        raise EmptyWindow("opponent window is empty")
    mixture = [(float(w), pol) for w, pol in zip(weights, window) if w > 0]
    table = {}
    values = []
    for seat in range(game.num_players):
        br, v = exact_best_response(game, seat, mixture)
        table.update(br.table)
        values.append(v)
    return BehavioralPolicy(table, name="exact_br"), float(np.mean(values))
