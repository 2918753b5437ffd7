"""Kuhn poker: three cards, one ante, a single bet of one chip.

Actions are 0 = pass/check/fold and 1 = bet/call. Card deals happen in a single
chance node over the six ordered pairs.
"""
import itertools

from .base import CHANCE, TERMINAL

CARD_NAMES = "JQK"
DEALS = list(itertools.permutations(range(3), 2))
_LETTER = "pb"


class KuhnState:
    __slots__ = ("cards", "history")

    def __init__(self, cards=None, history=""):
        self.cards = cards
        self.history = history

    @classmethod
    def initial(cls):
        return cls()

    def current_player(self):
        if self.cards is None:
            return CHANCE
        if self.history in ("pp", "bp", "bb", "pbp", "pbb"):
            return TERMINAL
        return len(self.history) % 2

    def legal_actions(self):
        return [0, 1]

    def chance_outcomes(self):
        p = 1.0 / len(DEALS)
        return [(i, p) for i in range(len(DEALS))]

    def child(self, action):
        if self.cards is None:
            return KuhnState(DEALS[action], "")
        return KuhnState(self.cards, self.history + _LETTER[action])

    def returns(self):
        h = self.history
        if h == "bp":
            return (1.0, -1.0)
        if h == "pbp":
            return (-1.0, 1.0)
        stake = 1.0 if h == "pp" else 2.0
        win = stake if self.cards[0] > self.cards[1] else -stake
        return (win, -win)

    def info_key(self, player):
        return f"p{player}|card={CARD_NAMES[self.cards[player]]}|hist={self.history}"
