"""Flat breadth-first game tree used by all exact computations.

Nodes are stored in BFS order, so every depth level is a contiguous slice and
children of one node are contiguous. Sequences are indexed per player: index 0 is
the empty sequence and information state ``I`` owns indices
``seq_start[I] .. seq_start[I] + num_actions[I] - 1``.
"""
from __future__ import annotations

from collections import deque
from functools import lru_cache

import numpy as np

from .base import CHANCE, TERMINAL, GameSpec, new_initial_state


class InfoSet:
    __slots__ = ("key", "player", "actions", "seq_start", "parent_seq", "depth", "index")

    def __init__(self, key, player, actions, seq_start, parent_seq, depth, index):
        self.key = key
        self.player = player
        self.actions = actions
        self.seq_start = seq_start
        self.parent_seq = parent_seq
        self.depth = depth
        self.index = index

    @property
    def num_actions(self):
        return len(self.actions)


class GameTree:
    def __init__(self, game: GameSpec):
        self.game = game
        n_players = game.num_players
        root = new_initial_state(game)

        player, parent, depth, first_child, n_children = [], [], [], [], []
        edge_seq, edge_prob, infoset, returns = [], [], [], []
        self.infosets: list[list[InfoSet]] = [[] for _ in range(n_players)]
        self.infoset_index: list[dict[str, InfoSet]] = [{} for _ in range(n_players)]
        self.num_sequences = [1] * n_players

        # (state, parent node, depth, own last sequence per player)
        queue = deque([(root, -1, 0, (0,) * n_players)])
        pending_children = {}
        while queue:
            state, par, d, own_seq = queue.popleft()
            node = len(player)
            p = state.current_player()
            player.append(p)
            parent.append(par)
            depth.append(d)
            first_child.append(-1)
            n_children.append(0)
            infoset.append(-1)
            returns.append(state.returns() if p == TERMINAL else None)
            e_seq, e_prob = pending_children.pop(node, (-1, 1.0))
            edge_seq.append(e_seq)
            edge_prob.append(e_prob)
            if p == TERMINAL:
                continue
            base = node + len(queue) + 1
            first_child[node] = base
            if p == CHANCE:
                outcomes = state.chance_outcomes()
                n_children[node] = len(outcomes)
                for j, (a, prob) in enumerate(outcomes):
                    pending_children[base + j] = (-1, prob)
                    queue.append((state.child(a), node, d + 1, own_seq))
                continue
            key = state.info_key(p)
            info = self.infoset_index[p].get(key)
            actions = state.legal_actions()
            if info is None:
                info = InfoSet(
                    key, p, tuple(actions), self.num_sequences[p], own_seq[p], d,
                    len(self.infosets[p]),
                )
                self.num_sequences[p] += len(actions)
                self.infosets[p].append(info)
                self.infoset_index[p][key] = info
            elif info.actions != tuple(actions) or info.depth != d:
                raise ValueError(f"inconsistent information state {key!r}")
            elif info.parent_seq != own_seq[p]:
                raise ValueError(f"imperfect recall at {key!r}")
            infoset[node] = info.index
            n_children[node] = len(actions)
            for j, a in enumerate(actions):
                seq = info.seq_start + j
                pending_children[base + j] = (seq, 1.0)
                nxt = own_seq[:p] + (seq,) + own_seq[p + 1:]
                queue.append((state.child(a), node, d + 1, nxt))

        self.player = np.asarray(player, dtype=np.int64)
        self.parent = np.asarray(parent, dtype=np.int64)
        self.depth = np.asarray(depth, dtype=np.int64)
        self.first_child = np.asarray(first_child, dtype=np.int64)
        self.num_children = np.asarray(n_children, dtype=np.int64)
        self.edge_seq = np.asarray(edge_seq, dtype=np.int64)
        self.chance_prob = np.asarray(edge_prob, dtype=float)
        self.infoset = np.asarray(infoset, dtype=np.int64)
        self.num_nodes = len(player)
        self.terminals = np.flatnonzero(self.player == TERMINAL)
        self.terminal_returns = np.asarray(
            [returns[t] for t in self.terminals], dtype=float
        ).reshape(len(self.terminals), n_players)

        self.max_depth = int(self.depth.max())
        bounds = np.searchsorted(self.depth, np.arange(self.max_depth + 2))
        self.level = [slice(int(bounds[d]), int(bounds[d + 1])) for d in range(self.max_depth + 1)]

        parent_player = np.where(self.parent >= 0, self.player[np.maximum(self.parent, 0)], TERMINAL)
        parent_player[0] = TERMINAL
        self.parent_player = parent_player
        # for each player, nodes entered through one of that player's actions
        self.owned_edges = [np.flatnonzero(parent_player == p) for p in range(n_players)]

        # infosets in creation (BFS) order have non-decreasing depth, so a parent
        # sequence always belongs to an earlier infoset
        self._levels_cache = {}
        self._seq_infoset = []
        self._seq_parent = []
        for p in range(n_players):
            owner = np.full(self.num_sequences[p], -1, dtype=np.int64)
            par = np.zeros(self.num_sequences[p], dtype=np.int64)
            for info in self.infosets[p]:
                sl = slice(info.seq_start, info.seq_start + info.num_actions)
                owner[sl] = info.index
                par[sl] = info.parent_seq
            self._seq_infoset.append(owner)
            self._seq_parent.append(par)

    def infoset_depth_levels(self, player):
        """Sequence index arrays grouped by infoset depth, shallow first."""
        cached = self._levels_cache.get(player)
        if cached is not None:
            return cached
        groups = {}
        for info in self.infosets[player]:
            groups.setdefault(info.depth, []).append(info)
        out = []
        for d in sorted(groups):
            seqs = np.concatenate(
                [np.arange(i.seq_start, i.seq_start + i.num_actions) for i in groups[d]]
            )
            out.append(seqs)
        self._levels_cache[player] = out
        return out

    def sequence_parent(self, player):
        return self._seq_parent[player]

    def sequence_infoset(self, player):
        return self._seq_infoset[player]


@lru_cache(maxsize=16)
def game_tree(game: GameSpec) -> GameTree:
    return GameTree(game)
