"""Goofspiel with a fixed descending point-card order and win/loss returns.

Each round every player bids one card from a hand of 1..num_cards; the unique
highest bid takes the point card, ties discard it. Bids of finished rounds are
public. Action ``a`` bids card ``a + 1``.

Returns are zero-sum: ``n/(n-1) * (share - 1/n)`` where ``share`` is 1/k for each
of the k players tied on the most points and 0 otherwise. For two players this is
+1 win, -1 loss, 0 draw; :func:`win_loss_points` gives the 1/0 convention.
"""
from .base import TERMINAL


class GoofspielState:
    __slots__ = ("num_cards", "num_players", "history", "pending")

    def __init__(self, num_cards, num_players, history=(), pending=()):
        self.num_cards = num_cards
        self.num_players = num_players
        self.history = history
        self.pending = pending

    @classmethod
    def initial(cls, num_cards=5, num_players=2):
        return cls(int(num_cards), int(num_players))

    def current_player(self):
        if len(self.history) == self.num_cards:
            return TERMINAL
        return len(self.pending)

    def point_card(self, rnd):
        return self.num_cards - rnd

    def legal_actions(self):
        player = len(self.pending)
        used = {bids[player] for bids in self.history}
        return [a for a in range(self.num_cards) if a not in used]

    def chance_outcomes(self):
        return []

    def child(self, action):
        pending = self.pending + (action,)
        if len(pending) == self.num_players:
            return GoofspielState(
                self.num_cards, self.num_players, self.history + (pending,), ()
            )
        return GoofspielState(self.num_cards, self.num_players, self.history, pending)

    def points(self):
        pts = [0] * self.num_players
        for rnd, bids in enumerate(self.history):
            top = max(bids)
            if bids.count(top) == 1:
                pts[bids.index(top)] += self.point_card(rnd)
        return pts

    def returns(self):
        pts = self.points()
        best = max(pts)
        k = pts.count(best)
        n = self.num_players
        scale = n / (n - 1)
        return tuple(
            scale * ((1.0 / k if p == best else 0.0) - 1.0 / n) for p in pts
        )

    def info_key(self, player):
        hist = ";".join(",".join(str(b + 1) for b in bids) for bids in self.history)
        return f"p{player}|bids={hist}"


def win_loss_points(ret):
    """Map a zero-sum return to the 1 = win / 0 = otherwise convention."""
    return 1.0 if ret > 0 else 0.0
