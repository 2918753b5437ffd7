import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chi2

from sfpsro import oracles
from sfpsro.best_response import (
    BestResponseTrainer,
    DiversityShaper,
    InteractionLog,
    LearnerState,
    OpponentSampler,
    diversity_bonus,
    exact_symmetric_response,
    reset,
    train_best_response,
)
from sfpsro.errors import EmptyWindow, InvalidBudget, ShapeError
from sfpsro.games import (
    expected_utility,
    game_tree,
    joint_realization,
    kuhn_poker,
    matrix_game,
    rock_paper_scissors,
    uniform_policy,
)
from sfpsro.games.policy import matrix_strategy

RPS = rock_paper_scissors()


def pures(game):
    n = game.payoff_matrix.shape[0]
    return [matrix_strategy(game_tree(game), a) for a in range(n)]


def train(game, window, sigma, budget, seed, lam=0.0, existing=(), learner=None, eps_mix=0.1, player=None):
    return train_best_response(
        game, player, window, sigma, budget, lam, list(existing),
        learner or LearnerState(), np.random.default_rng(seed), eps_mix=eps_mix,
    )


def test_rps_against_rock_learns_paper():
    rock = pures(RPS)[0]
    pol, log = train(RPS, [rock], [1.0], 5000, seed=1)
    for seat in (0, 1):
        assert pol.action_probs(f"p{seat}|", 3)[1] >= 0.99
    br, v = exact_best_response_rps_rock()
    assert br.table["p0|"][1] == 1.0 and v == 1.0


def exact_best_response_rps_rock():
    from sfpsro.games import exact_best_response

    return exact_best_response(RPS, 0, [(1.0, pures(RPS)[0])])


@pytest.mark.parametrize("budget", [1, 7, 250, 1000])
def test_log_has_one_entry_per_episode(budget):
    window = pures(RPS)
    _, log = train(RPS, window, [0.2, 0.3, 0.5], budget, seed=budget)
    assert len(log) == budget
    assert log.counts().sum() == budget
    episodes = sorted(e for rows in log.entries for e, _, _ in rows)
    assert episodes == list(range(budget))


def test_outcomes_in_payoff_range():
    _, log = train(kuhn_poker(), [uniform_policy()], [1.0], 400, seed=2)
    vals = [o for rows in log.entries for _, o, _ in rows]
    assert min(vals) >= -2 and max(vals) <= 2


def test_budget_and_window_errors():
    with pytest.raises(InvalidBudget):
        train(RPS, pures(RPS), [1 / 3] * 3, 0, seed=0)
    with pytest.raises(EmptyWindow):
        train(RPS, [], [], 10, seed=0)
    with pytest.raises(ShapeError):
        train(RPS, pures(RPS), [0.5, 0.5], 10, seed=0)


def test_diversity_breaks_payoff_tie():
    game = matrix_game([[0, 0], [0, 0]])
    existing = [joint_realization(game_tree(game), pures(game)[0])]
    # enumerate both pure candidates: equal payoff, only action 1 adds hull distance
    cand = [diversity_bonus(joint_realization(game_tree(game), p), existing) for p in pures(game)]
    assert cand[0] == 0.0 and cand[1] > 0.0
    pol, _ = train(game, pures(game)[:1], [1.0], 2000, seed=3, lam=1.0, existing=existing)
    for seat in (0, 1):
        assert pol.action_probs(f"p{seat}|", 2)[1] > 0.5


def test_no_diversity_keeps_lowest_action_on_tie():
    game = matrix_game([[0, 0], [0, 0]])
    pol, _ = train(game, pures(game)[:1], [1.0], 500, seed=3, lam=0.0)
    assert pol.action_probs("p0|", 2)[0] == 1.0


def test_reset_matches_fresh_learner():
    window = [uniform_policy()]
    used = LearnerState()
    train(kuhn_poker(), window, [1.0], 300, seed=9, learner=used)
    assert used.q
    reset(used)
    fresh = LearnerState()
    assert used.snapshot() == fresh.snapshot()
    p1, l1 = train(kuhn_poker(), window, [1.0], 500, seed=4, learner=used)
    p2, l2 = train(kuhn_poker(), window, [1.0], 500, seed=4, learner=fresh)
    assert used.snapshot() == fresh.snapshot()
    assert l1.entries == l2.entries
    reset(used)
    once = used.snapshot()
    reset(used)
    assert used.snapshot() == once


def test_tables_carry_over_without_reset():
    learner = LearnerState()
    train(kuhn_poker(), [uniform_policy()], [1.0], 300, seed=1, learner=learner)
    visits_before = sum(int(v.sum()) for v in learner.visits.values())
    train(kuhn_poker(), [uniform_policy()], [1.0], 300, seed=2, learner=learner)
    assert sum(int(v.sum()) for v in learner.visits.values()) > visits_before


def test_determinism():
    window = pures(RPS)
    a = train(RPS, window, [0.5, 0.25, 0.25], 800, seed=21)
    b = train(RPS, window, [0.5, 0.25, 0.25], 800, seed=21)
    assert a[1].entries == b[1].entries
    assert {k: v.tolist() for k, v in a[0].table.items()} == {k: v.tolist() for k, v in b[0].table.items()}


def test_slot_frequencies_match_smoothed_sigma():
    sigma = np.array([0.6, 0.3, 0.1, 0.0])
    eps = 0.1
    n = 10_000
    sampler = OpponentSampler(4, eps, np.random.default_rng(8))
    counts = np.bincount([sampler.draw(sigma) for _ in range(n)], minlength=4)
    expected = n * ((1 - eps) * sigma + eps / 4)
    stat = ((counts - expected) ** 2 / expected).sum()
    assert stat < chi2.ppf(0.999, df=3)


def test_sampler_covers_every_slot():
    k = 12
    sampler = OpponentSampler(k, 0.1, np.random.default_rng(0))
    draws = [sampler.draw(np.eye(k)[0]) for _ in range(10 * k)]
    assert set(draws) == set(range(k))


def test_sampler_external_share():
    sampler = OpponentSampler(3, 0.25, np.random.default_rng(0))
    draws = [sampler.draw(None) for _ in range(40)]
    assert draws.count(-1) == 30
    # 10 uniform draws cycle through shuffled rounds of all 3 slots
    counts = np.bincount([d for d in draws if d >= 0], minlength=3)
    assert sorted(counts.tolist()) == [3, 3, 4]


def test_external_opponent_logged_separately():
    trainer = BestResponseTrainer(RPS, pures(RPS), LearnerState(), np.random.default_rng(0), eps_mix=0.5)
    trainer.run(20, None, opponent=pures(RPS)[2])
    assert len(trainer.log.external) == 10
    assert trainer.log.counts().sum() == 10
    assert trainer.log.external_mean() == pytest.approx(
        np.mean([o for _, o, _ in trainer.log.external])
    )


def test_interaction_log_means():
    log = InteractionLog(2)
    for ep, (o, seat) in enumerate([(1.0, 0), (0.0, 0), (-1.0, 1)]):
        log.record(0, ep, o, seat)
    # seat-balanced: mean(1, 0) and -1 averaged
    assert log.means()[0] == pytest.approx(-0.25)
    assert np.isnan(log.means()[1])
    # the tail keeps ceil(fraction * n) rows
    assert log.means(tail_fraction=0.3)[0] == -1.0
    assert log.means(tail_fraction=0.34)[0] == -0.5


@pytest.mark.parametrize("seed", range(5))
def test_learned_value_close_to_exact(seed):
    rng = np.random.default_rng(100 + seed)
    U = rng.integers(-2, 3, size=(4, 4)).astype(float)
    P = np.triu(U, 1) - np.triu(U, 1).T
    game = matrix_game(P)
    window = pures(game)
    sigma = rng.dirichlet(np.ones(4))
    _, exact_v = exact_symmetric_response(game, window, sigma)
    pol, _ = train(game, window, sigma, 6000, seed=seed)
    learned = np.mean([
        sum(w * expected_utility(game, [pol, opp])[0] for w, opp in zip(sigma, window)),
        sum(w * expected_utility(game, [opp, pol])[1] for w, opp in zip(sigma, window)),
    ])
    assert learned >= exact_v - 0.05


def test_kuhn_learner_approaches_exact_br():
    u = uniform_policy()
    _, exact_v = exact_symmetric_response(kuhn_poker(), [u], [1.0])
    assert exact_v == pytest.approx((0.5 + 5 / 12) / 2, abs=1e-12)
    pol, _ = train(kuhn_poker(), [u], [1.0], 20_000, seed=0)
    v = 0.5 * (expected_utility(kuhn_poker(), [pol, u])[0] + expected_utility(kuhn_poker(), [u, pol])[1])
    assert v >= exact_v - 0.05


# diversity bonus

def test_bonus_hull_members():
    A, B = np.array([1.0, 1.0, 0.0]), np.array([1.0, 0.0, 1.0])
    assert diversity_bonus(A, [A, B]) <= 1e-8
    assert diversity_bonus((A + B) / 2, [A, B]) <= 1e-8
    assert diversity_bonus(np.array([1.0, 0.5, 0.5]), [A, B]) <= 1e-8
    assert diversity_bonus(A, []) == 0.0


def test_bonus_shape_error():
    with pytest.raises(ShapeError):
        diversity_bonus(np.zeros(3), [np.zeros(4)])


@pytest.mark.parametrize("delta", [0.1, 0.25, 0.5, 1.0, 2.0])
def test_bonus_matches_grid_oracle(delta):
    A, B = np.array([1.0, 1.0, 0.0]), np.array([1.0, 0.0, 1.0])
    for x in (A + np.array([0.0, delta, -delta]), np.array([1.0 + delta, 0.3, 0.3]), np.array([0.0, delta, delta])):
        d = diversity_bonus(x, [A, B])
        assert d == pytest.approx(oracles.grid_hull_distance([A, B], x), abs=1e-6)
        assert d > 0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=9, max_size=9), st.floats(0, 1))
def test_bonus_random_3d_cases(coords, a):
    A, B, x = np.array(coords[:3]), np.array(coords[3:6]), np.array(coords[6:])
    d = diversity_bonus(x, [A, B])
    assert d == pytest.approx(oracles.grid_hull_distance([A, B], x), abs=1e-6)
    assert diversity_bonus(a * A + (1 - a) * B, [A, B]) <= 1e-8


def test_shaper_gains_point_away_from_population():
    game = matrix_game([[0, 1], [-1, 0]])
    tree = game_tree(game)
    existing = [joint_realization(tree, pures(game)[0])]
    shaper = DiversityShaper(game, existing)
    base = shaper.refresh(pures(game)[0])
    assert base == pytest.approx(0.0, abs=1e-12)
    assert shaper.gain["p0|"][1] > 0 and shaper.gain["p0|"][0] == 0.0
