"""PSRO-family run loops and the bounded-population convergence experiment.

All two-player games are handled as one symmetric population: every policy covers
both seats, meta-payoffs are seat-averaged, and each iteration adds a single
both-seat response. Simulated wall time is a deterministic cost model
(``(br_episodes + gs_sims) * episode_cost_s``); measured seconds are kept beside
the record but never written into the run CSV.
"""
from __future__ import annotations

import io
import itertools
import math
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .best_response import (
    BestResponseTrainer,
    LearnerState,
    exact_symmetric_response,
    reset,
)
from .cost_model import gs_count
from .dynamic_window import (
    SketchyPayoffMatrix,
    StrategyWindow,
    eliminate,
    fill,
    nash_clustering,
    select_elimination,
)
from .errors import ConfigError, UnsupportedPlayerCount
from .games import (
    GameSpec,
    exploitability,
    game_tree,
    joint_realization,
    payoff_range,
    seat_averaged_payoff,
    simulate_episode,
    uniform_policy,
)
from .meta_solvers import (
    SUPPORT_THRESHOLD,
    OutcomeBuffer,
    hedge_update,
    mss_last,
    mss_uniform,
    record_outcome,
    solve_matrix_game,
    solve_zero_sum_nash,
)

METHODS = ("vanilla_psro", "sf_psro_window", "anytime_psro", "self_play_psro", "fsp", "vanilla_sp")
SIMULATION_FREE = METHODS[1:]
BR_MODES = ("tabular", "exact")
GS_MODES = ("sampled", "exact")
EVAL_METAS = ("auto", "sketchy", "mss")
UNBOUNDED = 10**9

# stream roles for the RNG key tuple (seed, iteration, player, role)
ROLE_BR, ROLE_GS, ROLE_AUX, ROLE_EVAL = 0, 1, 2, 3

CSV_COLUMNS = (
    "iteration", "br_episodes_cum", "gs_sims_cum", "wall_s",
    "exploitability", "window_occupancy", "eliminated_age",
)


def rng_stream(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based Philox generator keyed by ``(seed, *keys)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *keys])))


@dataclass(frozen=True)
class RunConfig:
    game: GameSpec
    method: str = "sf_psro_window"
    iterations: int = 20
    episodes_per_br: int = 20_000
    scale: float = 1.0
    n_outer: int = 10
    m_inner: int | None = None
    window_capacity: int = 30
    diversity_weight: float = 1.0
    eta: float = 0.1
    eps_mix: float = 0.1
    reset_learner: bool = True
    carry_hedge: bool = False
    gs_samples_per_profile: int = 100
    br_mode: str = "tabular"
    gs_mode: str = "sampled"
    eval_meta: str = "auto"
    fill_tail_fraction: float = 1.0
    learner_epsilon: float = 0.05
    gamma: float = 1.0
    episode_cost_s: float = 1e-4
    nash_tol: float = 1e-6
    population_bound: int = 30
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.method in METHODS, f"unknown method {self.method!r}; expected one of {METHODS}")
        need(self.br_mode in BR_MODES, f"br_mode must be one of {BR_MODES}")
        need(self.gs_mode in GS_MODES, f"gs_mode must be one of {GS_MODES}")
        need(self.eval_meta in EVAL_METAS, f"eval_meta must be one of {EVAL_METAS}")
        need(self.iterations >= 0, "iterations must be >= 0")
        need(self.episodes_per_br >= 1, "episodes_per_br must be >= 1")
        need(self.scale > 0, "scale must be positive")
        need(self.n_outer >= 1, "n_outer must be >= 1")
        need(self.m_inner is None or self.m_inner >= 1, "m_inner must be >= 1")
        need(self.window_capacity >= 1, "window_capacity must be >= 1")
        need(self.diversity_weight >= 0, "diversity_weight must be >= 0")
        need(self.eta >= 0, "eta must be >= 0")
        need(0 < self.eps_mix <= 1, "eps_mix must lie in (0, 1]")
        need(0 < self.fill_tail_fraction <= 1, "fill_tail_fraction must lie in (0, 1]")
        need(0 <= self.learner_epsilon <= 1, "learner_epsilon must lie in [0, 1]")
        need(0 <= self.gamma <= 1, "gamma must lie in [0, 1]")
        need(self.gs_samples_per_profile >= 1, "gs_samples_per_profile must be >= 1")
        need(self.episode_cost_s >= 0, "episode_cost_s must be >= 0")
        need(self.nash_tol > 0, "nash_tol must be positive")
        need(self.population_bound >= 1, "population_bound must be >= 1")
        need(self.seed >= 0, "seed must be >= 0")
        if self.method == "vanilla_psro":
            need(self.game.num_players == 2, "vanilla_psro needs a 2-player game")
        if self.method in SIMULATION_FREE and self.br_mode == "tabular":
            # every window slot must be drawn at least once per response
            slots = self.max_occupancy
            uniform_draws = math.floor(self.br_episodes * self.eps_mix)
            need(uniform_draws >= slots,
                 f"episodes x eps_mix = {uniform_draws} uniform draws cannot cover "
                 f"{slots} window slots; raise episodes_per_br or eps_mix")

    @property
    def m(self) -> int:
        if self.m_inner is not None:
            return self.m_inner
        budget = max(1, round(self.episodes_per_br * self.scale))
        return max(1, budget // (self.n_outer * self.game.num_players))

    @property
    def br_episodes(self) -> int:
        """Learner episodes spent on one response."""
        return self.n_outer * self.m * self.game.num_players

    @property
    def capacity(self) -> int:
        return self.window_capacity if self.method == "sf_psro_window" else UNBOUNDED

    @property
    def max_occupancy(self) -> int:
        """Largest window a response is trained against."""
        grow = 2 if self.method == "self_play_psro" else 1
        return min(1 + grow * max(self.iterations - 1, 0), self.capacity)

    def resolved(self) -> dict:
        out = {}
        for f in fields(self):
            out[f.name] = getattr(self, f.name)
        out["m_inner"] = self.m
        return out


@dataclass
class RunRecord:
    rows: list = field(default_factory=list)
    measured_s: list = field(default_factory=list)
    window: StrategyWindow | None = None
    matrix: SketchyPayoffMatrix | None = None
    meta: np.ndarray | None = None

    def add(self, iteration, br_episodes, gs_sims, wall_s, expl, occupancy, eliminated, measured):
        self.rows.append((iteration, br_episodes, gs_sims, wall_s, expl, occupancy, eliminated))
        self.measured_s.append(measured)

    def column(self, name):
        i = CSV_COLUMNS.index(name)
        return [r[i] for r in self.rows]

    def csv_text(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for it, br, gs, wall, expl, occ, elim in self.rows:
            elim_s = ";".join(str(a) for a in elim)
            expl_s = "" if expl is None else repr(float(expl))
            buf.write(f"{it},{br},{gs},{float(wall)!r},{expl_s},{occ},{elim_s}\n")
        return buf.getvalue()

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(self.csv_text())


class _Clock:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.br = 0
        self.gs = 0
        self.start = time.perf_counter()

    @property
    def wall(self):
        return (self.br + self.gs) * self.cfg.episode_cost_s

    @property
    def measured(self):
        return time.perf_counter() - self.start


def _evaluate(cfg: RunConfig, meta, policies):
    if cfg.game.num_players != 2:
        return None
    return exploitability(cfg.game, meta, list(policies))


def _sketchy_nash(cfg, matrix: SketchyPayoffMatrix):
    return solve_zero_sum_nash(matrix.values, cfg.nash_tol).strategy


def run(cfg: RunConfig, observer=None) -> RunRecord:
    """Dispatch to the loop selected by ``cfg.method``.

    ``observer(event, matrix, window)`` is called after every fill and elimination
    of the simulation-free loops.
    """
    if cfg.method == "vanilla_psro":
        return run_vanilla_psro(cfg)
    return _run_simulation_free(cfg, observer)


# Vanilla PSRO: meta-payoffs filled by game simulation


def _simulate_entry(cfg, rng, a, b):
    """Seat-averaged payoff of ``a`` vs ``b`` from K simulations per seat order."""
    K = cfg.gs_samples_per_profile
    if cfg.gs_mode == "exact":
        return seat_averaged_payoff(cfg.game, a, b)
    first = math.fsum(simulate_episode(cfg.game, [a, b], rng)[0] for _ in range(K)) / K
    second = math.fsum(simulate_episode(cfg.game, [b, a], rng)[0] for _ in range(K)) / K
    return 0.5 * (first - second)


def _self_play_sims(cfg, rng, a):
    # the (new, new) profile is simulated for the count; its symmetrized value is 0
    if cfg.gs_mode == "sampled":
        for _ in range(cfg.gs_samples_per_profile):
            simulate_episode(cfg.game, [a, a], rng)


def run_vanilla_psro(cfg: RunConfig) -> RunRecord:
    if cfg.game.num_players != 2:
        raise UnsupportedPlayerCount("vanilla PSRO is run on 2-player games")
    clock = _Clock(cfg)
    record = RunRecord()
    pop = [uniform_policy()]
    M = np.zeros((1, 1))
    K = cfg.gs_samples_per_profile
    # the initial single-profile matrix counts as one GS fill
    clock.gs += gs_count(1, 2, K)
    _self_play_sims(cfg, rng_stream(cfg.seed, 0, 0, ROLE_GS), pop[0])
    learner = LearnerState(cfg.learner_epsilon, cfg.gamma)
    sigma = np.ones(1)
    record.add(0, clock.br, clock.gs, clock.wall, _evaluate(cfg, sigma, pop), 1, (), clock.measured)
    for t in range(1, cfg.iterations + 1):
        if cfg.br_mode == "exact":
            beta, _ = exact_symmetric_response(cfg.game, pop, sigma)
        else:
            if cfg.reset_learner:
                reset(learner)
            # the full meta-payoff matrix comes from simulation, so no coverage mixing
            trainer = BestResponseTrainer(
                cfg.game, pop, learner, rng_stream(cfg.seed, t, 0, ROLE_BR), eps_mix=0.0,
                diversity_weight=cfg.diversity_weight, existing_realizations=_realizations(cfg, pop),
            )
            trainer.run(cfg.br_episodes, sigma)
            beta = trainer.policy(name=f"br{t}")
        clock.br += cfg.br_episodes
        pop.append(beta)
        n = len(pop)
        rng = rng_stream(cfg.seed, t, 0, ROLE_GS)
        row = np.array([_simulate_entry(cfg, rng, beta, pop[j]) for j in range(n - 1)])
        _self_play_sims(cfg, rng, beta)
        grown = np.zeros((n, n))
        grown[:n - 1, :n - 1] = M
        grown[n - 1, :n - 1] = row
        grown[:n - 1, n - 1] = -row
        grown[grown == 0.0] = 0.0
        M = grown
        clock.gs += gs_count(n, 2, K)
        sigma = solve_zero_sum_nash(M, cfg.nash_tol).strategy
        record.add(t, clock.br, clock.gs, clock.wall, _evaluate(cfg, sigma, pop), n, (), clock.measured)
    record.window = StrategyWindow(UNBOUNDED, pop, list(range(len(pop))), len(pop))
    record.matrix = SketchyPayoffMatrix(M, np.zeros(M.shape, dtype=np.int64))
    record.meta = sigma
    return record


# Simulation-free family: sketchy matrix from training outcomes


def _realizations(cfg, policies):
    if cfg.diversity_weight <= 0:
        return []
    tree = game_tree(cfg.game)
    return [joint_realization(tree, p) for p in policies]


def _next_meta(cfg, buffer: OutcomeBuffer, window: StrategyWindow) -> np.ndarray:
    if cfg.method == "fsp":
        return mss_uniform(len(window)).weights
    if cfg.method == "vanilla_sp":
        return mss_last(len(window), window.ages).weights
    return hedge_update(buffer, cfg.eta).weights


def _initial_meta(cfg, buffer, window) -> np.ndarray:
    if cfg.method in ("fsp", "vanilla_sp") or cfg.carry_hedge:
        return _next_meta(cfg, buffer, window)
    return mss_uniform(len(window)).weights


def _reported_meta(cfg, matrix, window) -> np.ndarray:
    mode = cfg.eval_meta
    if mode == "auto":
        mode = "mss" if cfg.method in ("fsp", "vanilla_sp") else "sketchy"
    if mode == "sketchy":
        return _sketchy_nash(cfg, matrix)
    if cfg.method == "vanilla_sp":
        return mss_last(len(window), window.ages).weights
    return mss_uniform(len(window)).weights


def _trainer(cfg, t, policies, learner, role):
    return BestResponseTrainer(
        cfg.game, policies, learner, rng_stream(cfg.seed, t, 0, role), eps_mix=cfg.eps_mix,
        diversity_weight=cfg.diversity_weight, existing_realizations=_realizations(cfg, policies),
    )


def _train_responses(cfg, t, window, learners, buffer, sigma):
    """Responses for iteration ``t`` as ``[(policy, slot means, sample counts)]``.

    The main response follows the meta-strategy updated after every round. For
    self-play PSRO an auxiliary response is trained each round against the main
    response as it stands; its last mean is against the main response itself.
    """
    policies = list(window)
    aux = cfg.method == "self_play_psro"
    if cfg.br_mode == "exact":
        beta = None
        for _ in range(cfg.n_outer):
            beta, _ = exact_symmetric_response(cfg.game, policies, sigma)
            for i, pol in enumerate(policies):
                record_outcome(buffer, i, -seat_averaged_payoff(cfg.game, beta, pol))
            sigma = _next_meta(cfg, buffer, window)
        out = [(beta, [seat_averaged_payoff(cfg.game, beta, p) for p in policies], None)]
        if aux:
            nu, _ = exact_symmetric_response(cfg.game, [beta], [1.0])
            out.append((nu, [seat_averaged_payoff(cfg.game, nu, p) for p in policies + [beta]], None))
        return out

    main = _trainer(cfg, t, policies, learners[0], ROLE_BR)
    side = _trainer(cfg, t, policies, learners[1], ROLE_AUX) if aux else None
    per_round = cfg.m * cfg.game.num_players
    for _ in range(cfg.n_outer):
        if side is not None:
            side.run(per_round, None, opponent=main.policy())
        for slot, outcome in main.run(per_round, sigma):
            record_outcome(buffer, slot, -outcome)
        sigma = _next_meta(cfg, buffer, window)
    tail = cfg.fill_tail_fraction
    out = [(main.policy(name=f"br{t}"), main.log.means(tail), main.log.counts())]
    if side is not None:
        log = side.log
        out.append((side.policy(name=f"aux{t}"), np.append(log.means(tail), log.external_mean(tail)),
                    np.append(log.counts(), len(log.external))))
    return out


def _run_simulation_free(cfg: RunConfig, observer=None) -> RunRecord:
    clock = _Clock(cfg)
    record = RunRecord()
    window = StrategyWindow(cfg.capacity)
    window.insert(uniform_policy())
    matrix = fill(SketchyPayoffMatrix(), [])
    buffer = OutcomeBuffer(1)
    learner = LearnerState(cfg.learner_epsilon, cfg.gamma)
    aux_learner = LearnerState(cfg.learner_epsilon, cfg.gamma)
    rng_range = payoff_range(cfg.game)
    meta = _reported_meta(cfg, matrix, window)
    record.add(0, 0, 0, clock.wall, _evaluate(cfg, meta, window), 1, (), clock.measured)
    for t in range(1, cfg.iterations + 1):
        if cfg.reset_learner:
            reset(learner)
            reset(aux_learner)
        if not cfg.carry_hedge:
            buffer = OutcomeBuffer(len(window))
        sigma = _initial_meta(cfg, buffer, window)
        new = _train_responses(cfg, t, window, (learner, aux_learner), buffer, sigma)
        clock.br += cfg.br_episodes * len(new)
        for pol, m, c in new:
            matrix = fill(matrix, m, c, payoff_range=rng_range)
            window.insert(pol)
            buffer.add_slot()
            if observer is not None:
                observer("fill", matrix, window)
        eliminated = []
        while window.overflowing:
            slot = select_elimination(nash_clustering(matrix, cfg.nash_tol), window)
            eliminated.append(window.ages[slot])
            matrix, window = eliminate(matrix, window, slot)
            buffer.remove_slot(slot)
            if observer is not None:
                observer("eliminate", matrix, window)
        meta = _reported_meta(cfg, matrix, window)
        record.add(t, clock.br, clock.gs, clock.wall, _evaluate(cfg, meta, window),
                   len(window), tuple(eliminated), clock.measured)
    record.window = window
    record.matrix = matrix
    record.meta = meta
    return record


def run_sf_psro_window(cfg: RunConfig, observer=None) -> RunRecord:
    return _run_simulation_free(replace(cfg, method="sf_psro_window"), observer)


def run_anytime_psro(cfg: RunConfig, observer=None) -> RunRecord:
    return _run_simulation_free(replace(cfg, method="anytime_psro"), observer)


def run_self_play_psro(cfg: RunConfig, observer=None) -> RunRecord:
    return _run_simulation_free(replace(cfg, method="self_play_psro"), observer)


def run_fsp(cfg: RunConfig, observer=None) -> RunRecord:
    return _run_simulation_free(replace(cfg, method="fsp"), observer)


def run_vanilla_sp(cfg: RunConfig, observer=None) -> RunRecord:
    return _run_simulation_free(replace(cfg, method="vanilla_sp"), observer)


# Bounded-population convergence experiment on a matrix game


@dataclass
class PotentialTrace:
    phi: list = field(default_factory=list)
    deviation_gain: list = field(default_factory=list)
    set_sizes: list = field(default_factory=list)
    pruned: list = field(default_factory=list)
    terminated: bool = False

    @property
    def iterations(self) -> int:
        return len(self.phi)

    def deviation_holds(self, tol: float = 1e-9) -> bool:
        return all(g >= -tol for gains in self.deviation_gain for g in gains)


def run_convergence_experiment(A, bound: int | None = None, tol: float = 1e-6,
                               max_iter: int | None = None,
                               threshold: float = SUPPORT_THRESHOLD) -> PotentialTrace:
    """Bounded PSRO with exact responses on the zero-sum game ``A`` (row player maximizes).

    ``A`` is a payoff matrix or a :class:`RunConfig` for a matrix game, whose
    ``population_bound`` then supplies ``bound``. Each player keeps a set of pure
    strategies; when a set exceeds ``bound`` only strategies with
    restricted-equilibrium probability at most ``threshold`` are dropped. Stops at
    the fixed point where each player's best response to the restricted
    equilibrium is already in its set, or after ``max_iter`` equilibrium solves.
    """
    if isinstance(A, RunConfig):
        if A.game.game_id != "matrix":
            raise ConfigError("the convergence experiment runs on matrix games")
        bound = A.population_bound if bound is None else bound
        tol = A.nash_tol
        A = A.game.payoff_matrix
    A = np.asarray(A, dtype=float)
    if bound is None:
        bound = max(A.shape)
    if A.ndim != 2:
        raise ValueError("payoff must be a matrix")
    payoffs = (A, -A.T)  # each player's payoff, own strategy on rows
    sets = [[0], [0]]
    trace = PotentialTrace()
    limit = max_iter if max_iter is not None else A.shape[0] + A.shape[1]
    for _ in range(limit):
        x, y, _, _ = solve_matrix_game(A[np.ix_(sets[0], sets[1])], tol)
        mu = []
        for p, strat in enumerate((x, y)):
            full = np.zeros(payoffs[p].shape[0])
            full[sets[p]] = strat
            mu.append(full)
        u = [float(mu[0] @ A @ mu[1]), float(-(mu[0] @ A @ mu[1]))]
        trace.phi.append(u[0] + u[1])
        trace.set_sizes.append((len(sets[0]), len(sets[1])))
        gains, added = [], []
        for p in range(2):
            vals = payoffs[p] @ mu[1 - p]
            br = int(np.flatnonzero(vals >= vals.max() - 1e-12)[0])
            gains.append(float(vals[br] - u[p]))
            in_set_best = vals[sets[p]].max()
            added.append(None if vals[br] <= in_set_best + tol else br)
        trace.deviation_gain.append(tuple(gains))
        if all(a is None for a in added):
            trace.terminated = True
            break
        dropped = []
        for p in range(2):
            if added[p] is None:
                continue
            sets[p].append(added[p])
            if len(sets[p]) > bound:
                keep = [s for s in sets[p] if s == added[p] or mu[p][s] > threshold]
                dropped.append(tuple(s for s in sets[p] if s not in keep))
                sets[p] = keep
        trace.pruned.append(tuple(dropped))
    return trace


# Three-player evaluation


def round_robin(game: GameSpec, entrants: dict, episodes: int, seed: int = 0) -> dict:
    """Mean return of each entrant over every seat assignment of the entrants.

    ``entrants`` maps a name to ``(weights, policies)``; each episode draws every
    seated entrant's policy from its weights.
    """
    names = sorted(entrants)
    totals = {n: 0.0 for n in names}
    seats = {n: 0 for n in names}
    rng = rng_stream(seed, 0, 0, ROLE_EVAL)
    for lineup in itertools.product(names, repeat=game.num_players):
        if len(set(lineup)) < min(len(names), game.num_players):
            continue
        for _ in range(episodes):
            profile = []
            for n in lineup:
                w, pols = entrants[n]
                profile.append(pols[int(rng.choice(len(pols), p=np.asarray(w, dtype=float)))])
            ret = simulate_episode(game, profile, rng)
            for seat, n in enumerate(lineup):
                totals[n] += ret[seat]
                seats[n] += 1
    return {n: totals[n] / seats[n] for n in names if seats[n]}


def exact_head_to_head(game: GameSpec, a, b) -> float:
    """Seat-averaged exact payoff of policy ``a`` against ``b`` (2-player games)."""
    if game.num_players != 2:
        raise UnsupportedPlayerCount("head-to-head evaluation needs 2 players")
    return seat_averaged_payoff(game, a, b)


