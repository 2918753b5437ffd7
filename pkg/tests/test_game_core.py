import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sfpsro import oracles
from sfpsro.errors import EmptyMixture, MissingPolicyEntry, ProfileArityMismatch, UnsupportedPlayerCount
from sfpsro.games import (
    BehavioralPolicy,
    exact_best_response,
    expected_utility,
    exploitability,
    game_tree,
    goofspiel,
    kuhn_poker,
    leduc_poker,
    matrix_game,
    new_initial_state,
    payoff_range,
    pure_policy,
    realization_vector,
    rock_paper_scissors,
    seat_averaged_payoff,
    simulate_episode,
    uniform_policy,
)
from sfpsro.games.base import CHANCE, TERMINAL
from sfpsro.games.goofspiel_rules import win_loss_points
from sfpsro.games.policy import matrix_strategy

# Frozen outputs of the enumeration oracle in sfpsro.oracles (64 pure strategies per seat).
KUHN_UNIFORM_VALUE = Fraction(1, 8)
KUHN_BR_SEAT0 = Fraction(1, 2)
KUHN_BR_SEAT1 = Fraction(5, 12)
KUHN_UNIFORM_EXPLOITABILITY = Fraction(11, 24)

RPS = rock_paper_scissors()


def rps_pure(a):
    return matrix_strategy(game_tree(RPS), a)


def kuhn_policy_from_oracle(s0, s1):
    table = {}
    for (card, hist), p in s0.items():
        table[f"p0|card={'JQK'[card]}|hist={hist}"] = [1 - float(p), float(p)]
    for (card, hist), p in s1.items():
        table[f"p1|card={'JQK'[card]}|hist={hist}"] = [1 - float(p), float(p)]
    return BehavioralPolicy(table)


def test_frozen_kuhn_oracle_values():
    u = oracles.kuhn_uniform()
    assert oracles.kuhn_value(u, u) == KUHN_UNIFORM_VALUE
    assert oracles.kuhn_best_response_value(0, u) == KUHN_BR_SEAT0
    assert oracles.kuhn_best_response_value(1, u) == KUHN_BR_SEAT1


def test_rps_pure_profile():
    assert expected_utility(RPS, [rps_pure(0), rps_pure(1)]).tolist() == [-1.0, 1.0]


def test_same_policy_seat_averaged_is_zero():
    for game in (RPS, kuhn_poker()):
        u = uniform_policy()
        assert seat_averaged_payoff(game, u, u) == 0.0


def test_kuhn_uniform_value():
    u = uniform_policy()
    v = expected_utility(kuhn_poker(), [u, u])
    assert v[0] == pytest.approx(float(KUHN_UNIFORM_VALUE), abs=1e-12)
    assert v[1] == -v[0]


def test_kuhn_random_profile_matches_oracle():
    rng = np.random.default_rng(7)
    for _ in range(5):
        s0 = {k: Fraction(int(rng.integers(0, 5)), 4) for k in oracles.KUHN_P0_POINTS}
        s1 = {k: Fraction(int(rng.integers(0, 5)), 4) for k in oracles.KUHN_P1_POINTS}
        pol = kuhn_policy_from_oracle(s0, s1)
        v = expected_utility(kuhn_poker(), [pol, pol])[0]
        assert v == pytest.approx(float(oracles.kuhn_value(s0, s1)), abs=1e-12)


def test_missing_entry_and_arity():
    with pytest.raises(MissingPolicyEntry):
        expected_utility(kuhn_poker(), [BehavioralPolicy({}), uniform_policy()])
    with pytest.raises(ProfileArityMismatch):
        expected_utility(RPS, [uniform_policy()])
    with pytest.raises(ProfileArityMismatch):
        simulate_episode(RPS, [uniform_policy()] * 3, np.random.default_rng(0))


def test_simulate_pure_matrix_is_exact():
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert simulate_episode(RPS, [rps_pure(2), rps_pure(0)], rng).tolist() == [-1.0, 1.0]


def test_simulate_deterministic_for_seed():
    prof = [uniform_policy(), uniform_policy()]
    a = [simulate_episode(kuhn_poker(), prof, np.random.default_rng(42)).tolist() for _ in range(3)]
    b = [simulate_episode(kuhn_poker(), prof, np.random.default_rng(42)).tolist() for _ in range(3)]
    assert a == b


def test_goofspiel_sampled_mean_within_three_sigma():
    game = goofspiel(5)
    prof = [uniform_policy(), uniform_policy()]
    exact = expected_utility(game, prof)[0]
    rng = np.random.default_rng(2024)
    n = 100_000
    samples = np.array([simulate_episode(game, prof, rng)[0] for _ in range(n)])
    sigma = samples.std() / np.sqrt(n)
    assert abs(samples.mean() - exact) <= 3 * sigma
    lo, hi = payoff_range(game)
    assert samples.min() >= lo and samples.max() <= hi


@pytest.mark.parametrize("game", [kuhn_poker(), goofspiel(3), goofspiel(3, 3), RPS])
def test_simulation_converges_within_bound(game):
    prof = [uniform_policy()] * game.num_players
    exact = expected_utility(game, prof)
    rng = np.random.default_rng(11)
    n = 4000
    mean = np.mean([simulate_episode(game, prof, rng) for _ in range(n)], axis=0)
    lo, hi = payoff_range(game)
    assert np.all(np.abs(mean - exact) <= 4 * (hi - lo) / np.sqrt(n))


def test_exact_br_rps():
    br, v = exact_best_response(RPS, 0, [(1.0, [rps_pure(0), rps_pure(0)])])
    assert v == 1.0
    assert br.table["p0|"].tolist() == [0.0, 1.0, 0.0]
    mix = [(1 / 3, rps_pure(a)) for a in range(3)]
    br, v = exact_best_response(RPS, 0, mix)
    assert v == pytest.approx(0.0, abs=1e-15)
    # all actions tie: lowest index wins
    assert br.table["p0|"].tolist() == [1.0, 0.0, 0.0]


def test_exact_br_kuhn_uniform():
    u = uniform_policy()
    assert exact_best_response(kuhn_poker(), 0, [(1.0, u)])[1] == pytest.approx(float(KUHN_BR_SEAT0), abs=1e-12)
    assert exact_best_response(kuhn_poker(), 1, [(1.0, u)])[1] == pytest.approx(float(KUHN_BR_SEAT1), abs=1e-12)


def test_exact_br_empty_mixture():
    with pytest.raises(EmptyMixture):
        exact_best_response(RPS, 0, [])


def test_exact_br_beats_every_pure_kuhn_strategy():
    rng = np.random.default_rng(3)
    opp = BehavioralPolicy(
        {info.key: rng.dirichlet([1, 1]) for infos in game_tree(kuhn_poker()).infosets for info in infos}
    )
    tree = game_tree(kuhn_poker())
    for seat in range(2):
        _, v = exact_best_response(kuhn_poker(), seat, [(1.0, opp)])
        keys = [i.key for i in tree.infosets[seat]]
        best = -np.inf
        for bits in itertools.product((0, 1), repeat=len(keys)):
            pure = pure_policy(dict(zip(keys, bits)), tree)
            prof = [pure, opp] if seat == 0 else [opp, pure]
            best = max(best, expected_utility(kuhn_poker(), prof)[seat])
        assert v == pytest.approx(best, abs=1e-12)


def test_exploitability_examples():
    pures = [rps_pure(a) for a in range(3)]
    assert exploitability(RPS, [1 / 3] * 3, pures) == pytest.approx(0.0, abs=1e-15)
    assert exploitability(RPS, [1.0, 0.0, 0.0], pures) == 1.0
    e = exploitability(kuhn_poker(), [1.0], [uniform_policy()])
    assert e == pytest.approx(float(KUHN_UNIFORM_EXPLOITABILITY), abs=1e-12)


def test_exploitability_three_players_rejected():
    with pytest.raises(UnsupportedPlayerCount):
        exploitability(goofspiel(3, 3), [1.0], [uniform_policy()])


def test_kuhn_nash_has_zero_exploitability():
    # alpha = 1/3 member of the known equilibrium family
    a = 1 / 3
    t = {
        "p0|card=J|hist=": [1 - a, a], "p0|card=Q|hist=": [1, 0], "p0|card=K|hist=": [1 - 3 * a, 3 * a],
        "p0|card=J|hist=pb": [1, 0], "p0|card=Q|hist=pb": [2 / 3 - a, a + 1 / 3], "p0|card=K|hist=pb": [0, 1],
        "p1|card=J|hist=p": [2 / 3, 1 / 3], "p1|card=Q|hist=p": [1, 0], "p1|card=K|hist=p": [0, 1],
        "p1|card=J|hist=b": [1, 0], "p1|card=Q|hist=b": [2 / 3, 1 / 3], "p1|card=K|hist=b": [0, 1],
    }
    pol = BehavioralPolicy(t)
    assert expected_utility(kuhn_poker(), [pol, pol])[0] == pytest.approx(-1 / 18, abs=1e-12)
    assert exploitability(kuhn_poker(), [1.0], [pol]) == pytest.approx(0.0, abs=1e-12)


def test_realization_single_decision():
    game = matrix_game([[0, 1], [-1, 0]])
    pol = BehavioralPolicy({"p0|": [0.3, 0.7], "p1|": [0.5, 0.5]})
    assert realization_vector(game_tree(game), 0, pol).tolist() == [1.0, 0.3, 0.7]


def test_realization_pure_is_binary():
    tree = game_tree(kuhn_poker())
    pol = pure_policy({"p0|card=K|hist=": 1}, tree)
    r = realization_vector(tree, 0, pol)
    assert set(r.tolist()) <= {0.0, 1.0}


def test_realization_kuhn_uniform_depths():
    tree = game_tree(kuhn_poker())
    for seat in range(2):
        r = realization_vector(tree, seat, uniform_policy())
        assert r[0] == 1.0
        for info in tree.infosets[seat]:
            # own-action depth of the sequences at this infostate
            d = 1 + (1 if info.key.endswith("pb") else 0)
            seqs = r[info.seq_start:info.seq_start + info.num_actions]
            assert np.all(seqs == 2.0 ** -d)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["kuhn", "leduc", "goof"]))
def test_realization_flow_conservation(seed, which):
    game = {"kuhn": kuhn_poker(), "leduc": leduc_poker(), "goof": goofspiel(4)}[which]
    tree = game_tree(game)
    rng = np.random.default_rng(seed)
    table = {i.key: rng.dirichlet(np.ones(i.num_actions)) for infos in tree.infosets for i in infos}
    pol = BehavioralPolicy(table)
    for seat in range(2):
        r = realization_vector(tree, seat, pol)
        assert np.all((r >= 0) & (r <= 1 + 1e-12))
        for info in tree.infosets[seat]:
            kids = r[info.seq_start:info.seq_start + info.num_actions]
            assert abs(kids.sum() - r[info.parent_seq]) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_zero_sum_profiles_sum_to_zero(seed):
    rng = np.random.default_rng(seed)
    for game in (kuhn_poker(), goofspiel(3)):
        tree = game_tree(game)
        pols = [
            BehavioralPolicy({i.key: rng.dirichlet(np.ones(i.num_actions)) for infos in tree.infosets for i in infos})
            for _ in range(2)
        ]
        v = expected_utility(game, pols)
        assert v[0] + v[1] == 0.0
        assert exploitability(game, [0.5, 0.5], pols) >= 0.0


def test_nash_of_matrix_game_has_small_exploitability():
    from sfpsro.meta_solvers import solve_zero_sum_nash

    rng = np.random.default_rng(5)
    for _ in range(10):
        U = rng.integers(-3, 4, size=(5, 5)).astype(float)
        P = np.triu(U, 1) - np.triu(U, 1).T
        game = matrix_game(P)
        x = solve_zero_sum_nash(P).strategy
        pures = [matrix_strategy(game_tree(game), a) for a in range(5)]
        assert exploitability(game, x, pures) <= 1e-6


def test_info_keys_hide_private_information():
    # Kuhn: seat 1 cannot see seat 0's card
    s = new_initial_state(kuhn_poker())
    a = s.child(0).child(0)  # deal (J, Q), seat 0 passes
    b = s.child(5).child(0)  # deal (K, Q), seat 0 passes
    assert a.cards[1] == b.cards[1]
    assert a.info_key(1) == b.info_key(1)
    assert a.info_key(0) != b.info_key(0)
    # Goofspiel: the second bidder of a round does not see the first bid
    g = new_initial_state(goofspiel(5))
    assert g.child(0).info_key(1) == g.child(4).info_key(1)
    assert g.child(0).child(1).info_key(0) != g.child(4).child(1).info_key(0)


def test_state_protocol_markers():
    s = new_initial_state(kuhn_poker())
    assert s.current_player() == CHANCE
    t = s.child(0).child(0).child(0)
    assert t.current_player() == TERMINAL


def test_goofspiel_win_loss_and_params():
    g = goofspiel()
    assert g.param("num_cards") == 5 and g.param("points_order") == "descending"
    assert win_loss_points(1.0) == 1.0 and win_loss_points(-1.0) == 0.0
    s = new_initial_state(g)
    for bids in [(4, 0), (3, 1), (2, 2), (1, 3), (0, 4)]:
        s = s.child(bids[0]).child(bids[1])
    # rounds worth 5 and 4 to seat 0, 2 and 1 to seat 1, the 3 is discarded
    assert s.points() == [9, 3]
    assert s.returns() == (1.0, -1.0)


def test_goofspiel_three_player_returns_zero_sum():
    s = new_initial_state(goofspiel(3, 3))
    for bids in [(2, 1, 0), (1, 0, 2), (0, 2, 1)]:
        for b in bids:
            s = s.child(b)
    assert s.current_player() == TERMINAL
    assert sum(s.returns()) == pytest.approx(0.0, abs=1e-15)


def test_gamespec_validation():
    with pytest.raises(ValueError):
        matrix_game([[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        kuhn_poker().__class__("kuhn_poker", 3)
    with pytest.raises(ValueError):
        goofspiel(5, 4)


def test_leduc_tree_size():
    tree = game_tree(leduc_poker())
    # standard Leduc: 936 information states in total
    assert len(tree.infosets[0]) == len(tree.infosets[1]) == 468
    u = uniform_policy()
    v = expected_utility(leduc_poker(), [u, u])
    assert v[0] + v[1] == 0.0


def test_goofspiel_factory_survives_state_import():
    import sfpsro.games as games

    new_initial_state(goofspiel(3))
    assert callable(games.goofspiel)
