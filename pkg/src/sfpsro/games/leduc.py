"""Leduc hold'em: six cards (J, Q, K in two suits), two betting rounds.

Each player antes one chip. Raises are 2 chips in the first round and 4 in the
second, with at most two raises per round. Actions: 0 = fold, 1 = check/call,
2 = bet/raise. Fold is only legal when facing a bet.
"""
from .base import CHANCE, TERMINAL

RANKS = "JQK"
SUITS = "sh"
NUM_CARDS = 6
RAISE_SIZE = (2, 4)
MAX_RAISES = 2
_LETTER = "fcr"

PRIVATE_DEALS = [(a, b) for a in range(NUM_CARDS) for b in range(NUM_CARDS) if a != b]


def card_name(card):
    return RANKS[card // 2] + SUITS[card % 2]


def _round_over(h):
    if len(h) < 2:
        return False
    return h[-1] == "c" and (h[-2] == "r" or h == "cc")


class LeducState:
    __slots__ = ("private", "public", "rounds", "folded")

    def __init__(self, private=None, public=None, rounds=("",), folded=None):
        self.private = private
        self.public = public
        self.rounds = rounds
        self.folded = folded

    @classmethod
    def initial(cls):
        return cls()

    def _contributions(self):
        contrib = [1, 1]
        for rnd, h in enumerate(self.rounds):
            player = 0
            for ch in h:
                if ch == "c":
                    contrib[player] = contrib[1 - player]
                elif ch == "r":
                    contrib[player] = contrib[1 - player] + RAISE_SIZE[rnd]
                player = 1 - player
        return contrib

    def current_player(self):
        if self.folded is not None:
            return TERMINAL
        if self.private is None:
            return CHANCE
        h = self.rounds[-1]
        if _round_over(h):
            if len(self.rounds) == 1:
                return CHANCE
            return TERMINAL
        return len(h) % 2

    def legal_actions(self):
        h = self.rounds[-1]
        facing = h.endswith("r")
        actions = [0, 1] if facing else [1]
        if h.count("r") < MAX_RAISES:
            actions.append(2)
        return actions

    def chance_outcomes(self):
        if self.private is None:
            p = 1.0 / len(PRIVATE_DEALS)
            return [(i, p) for i in range(len(PRIVATE_DEALS))]
        left = [c for c in range(NUM_CARDS) if c not in self.private]
        return [(c, 1.0 / len(left)) for c in left]

    def child(self, action):
        if self.private is None:
            return LeducState(PRIVATE_DEALS[action], None, ("",), None)
        h = self.rounds[-1]
        if _round_over(h):
            return LeducState(self.private, action, self.rounds + ("",), None)
        nh = h + _LETTER[action]
        folded = len(h) % 2 if action == 0 else None
        return LeducState(self.private, self.public, self.rounds[:-1] + (nh,), folded)

    def returns(self):
        contrib = self._contributions()
        if self.folded is not None:
            loser = self.folded
            # the fold itself does not change contributions
            won = contrib[loser]
            return (-won, won) if loser == 0 else (won, -won)
        r0, r1 = self.private[0] // 2, self.private[1] // 2
        pr = self.public // 2
        s0 = 10 + r0 if r0 == pr else r0
        s1 = 10 + r1 if r1 == pr else r1
        if s0 == s1:
            return (0.0, 0.0)
        stake = float(contrib[0])
        return (stake, -stake) if s0 > s1 else (-stake, stake)

    def info_key(self, player):
        key = f"p{player}|card={card_name(self.private[player])}|r1={self.rounds[0]}"
        if self.public is not None:
            key += f"|pub={card_name(self.public)}|r2={self.rounds[1]}"
        return key
