"""Symmetric two-player matrix game played as two hidden sequential moves."""
from .base import TERMINAL


class MatrixState:
    __slots__ = ("payoff", "moves")

    def __init__(self, payoff, moves=()):
        self.payoff = payoff
        self.moves = moves

    @classmethod
    def initial(cls, payoff):
        return cls(payoff)

    def current_player(self):
        return TERMINAL if len(self.moves) == 2 else len(self.moves)

    def legal_actions(self):
        return list(range(self.payoff.shape[0]))

    def chance_outcomes(self):
        return []

    def child(self, action):
        return MatrixState(self.payoff, self.moves + (action,))

    def returns(self):
        v = float(self.payoff[self.moves[0], self.moves[1]])
        return (v, -v)

    def info_key(self, player):
        # the column player never sees the row move
        return f"p{player}|"
