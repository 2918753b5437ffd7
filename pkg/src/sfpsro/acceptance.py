"""Acceptance battery shared by the ``suite`` subcommand and the test-suite.

Each check returns a :class:`Result`; :func:`run_battery` runs them in order and
:func:`format_table` renders one pass/fail line per criterion.
"""
from __future__ import annotations

import contextlib
import filecmp
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from unittest import mock

import numpy as np

from . import cost_model, meta_solvers, oracles
from .best_response import diversity_bonus
from .dynamic_window import nash_clustering, select_elimination
from .games import kuhn_poker, matrix_game, rock_paper_scissors
from .orchestrator import SIMULATION_FREE, RunConfig, run, run_convergence_experiment

MATCHING_PENNIES = ((1.0, -1.0), (-1.0, 1.0))


@dataclass(frozen=True)
class Result:
    cid: int
    title: str
    passed: bool
    detail: str
    seconds: float
    budget_s: float | None = None


def _random_antisymmetric(rng, n, values=None):
    if values is None:
        U = rng.uniform(-1.0, 1.0, (n, n))
    else:
        U = rng.choice(values, size=(n, n)).astype(float)
    A = np.triu(U, 1)
    return A - A.T


def transitive_cyclic_game(size: int = 12, cycle: int = 5) -> np.ndarray:
    """Strictly transitive ladder whose top ``cycle`` strategies form a cycle.

    Lower strategies are ordered by index; the top block plays a generalized
    rock-paper-scissors (each beats the next ``cycle // 2``) and beats everything
    below it. The equilibrium is uniform over the top block.
    """
    A = np.zeros((size, size))
    top = size - cycle
    for i in range(size):
        for j in range(size):
            if i == j:
                continue
            if i >= top and j >= top:
                A[i, j] = 1.0 if (j - i) % cycle <= cycle // 2 else -1.0
            else:
                A[i, j] = 1.0 if i > j else -1.0
    return A


def crit_cost(quick=False):
    start = time.perf_counter()
    value = cost_model.gs_count(10, 4, 1000)
    elapsed = time.perf_counter() - start
    ok = value == 3_439_000 and elapsed < 1e-3
    return ok, f"gs_count(10,4,1000)={value:,} in {elapsed * 1e6:.0f} us"


def crit_nash_oracle(quick=False):
    rng = np.random.default_rng(20240601)
    cases = [_random_antisymmetric(rng, int(rng.integers(1, 5)), np.arange(-2, 3)) for _ in range(500)]
    cases += [np.array(rock_paper_scissors().payoff_matrix), np.array(MATCHING_PENNIES)]
    worst_value = worst_gain = 0.0
    for A in cases:
        v, _, _ = oracles.support_enumeration_value(A)
        sol = meta_solvers.solve_zero_sum_nash(A, 1e-6)
        x = sol.strategy
        y = sol.column_strategy if sol.column_strategy is not None else x
        gain = max(float((A @ y).max() - x @ A @ y), float(x @ A @ y - (x @ A).min()))
        worst_value = max(worst_value, abs(sol.value - v))
        worst_gain = max(worst_gain, gain)
    ok = worst_value <= 1e-6 and worst_gain <= 1e-6
    return ok, f"{len(cases)} games, worst |value err|={worst_value:.1e}, worst gain={worst_gain:.1e}"


def crit_double_oracle(quick=False):
    rng = np.random.default_rng(7)
    worst = 0
    for _ in range(50):
        A = _random_antisymmetric(rng, 6)
        rec = run(RunConfig(matrix_game(A), method="vanilla_psro", iterations=6, br_mode="exact",
                            gs_mode="exact", diversity_weight=0.0))
        hits = [i for i, e in enumerate(rec.column("exploitability")) if e <= 1e-6]
        if not hits:
            return False, f"no convergence within 6 iterations (last {rec.rows[-1][4]:.2e})"
        worst = max(worst, hits[0])
    return worst <= 6, f"50 games, worst iterations to <=1e-6: {worst}"


def crit_clustering(quick=False):
    rng = np.random.default_rng(11)
    for n in range(1, 7):
        for _ in range(5):
            mag = rng.uniform(0.1, 2.0, (n, n))
            # slot i beats every j > i
            P = np.triu(mag, 1)
            P = P - P.T
            layers = [c.slots for c in nash_clustering(P).clusters]
            if layers != [(i,) for i in range(n)]:
                return False, f"transitive n={n}: layers {layers}"
    P = np.zeros((4, 4))
    P[:3, :3] = rock_paper_scissors().payoff_matrix
    P[:3, 3] = 1.0
    P[3, :3] = -1.0
    res = nash_clustering(P)
    layers = [c.slots for c in res.clusters]
    chosen = select_elimination(res)
    ok = layers == [(0, 1, 2), (3,)] and chosen == 3
    return ok, f"transitive n<=6 singleton layers; RPS+appendage layers {layers}, eliminate {chosen}"


def crit_bounded_population(quick=False):
    rng = np.random.default_rng(13)
    worst = 0
    for _ in range(20):
        trace = run_convergence_experiment(_random_antisymmetric(rng, 6), bound=6)
        if not trace.terminated or not trace.deviation_holds():
            return False, "no fixed point or deviation inequality violated"
        if any(phi != 0.0 for phi in trace.phi):
            return False, f"potential not identically zero: {trace.phi}"
        worst = max(worst, trace.iterations)
    return worst <= 6, f"20 games, worst iterations {worst}, phi == 0 throughout"


def crit_simulation_free(quick=False):
    details = []
    for method in SIMULATION_FREE:
        rec = run(RunConfig(kuhn_poker(), method=method, iterations=3, episodes_per_br=400,
                            diversity_weight=0.0, window_capacity=2))
        gs = rec.column("gs_sims_cum")
        if any(g != 0 for g in gs):
            return False, f"{method}: gs column {gs}"
        details.append(method)
    return True, "gs_sims_cum = 0 on every row for " + ", ".join(details)


def crit_hedge(quick=False):
    buf = meta_solvers.OutcomeBuffer(3)
    for slot, outcome in ((0, 0.4), (1, -0.2), (2, 0.9)):
        meta_solvers.record_outcome(buf, slot, outcome)
    uniform = meta_solvers.hedge_update(buf, 0.0).weights
    ok_uniform = np.allclose(uniform, 1.0 / 3.0, rtol=0.0, atol=1e-15)
    S = np.array([0.4, -0.2, 0.9])
    shifted = meta_solvers.hedge_update(S + 5.0, 0.7).weights
    base = meta_solvers.hedge_update(S, 0.7).weights
    shift_err = float(np.max(np.abs(shifted - base)))
    w = meta_solvers.hedge_update(np.array([1.0, 0.0]), 1.0).weights
    ok_value = abs(w[0] - 0.7311) <= 1e-4 and abs(w[1] - 0.2689) <= 1e-4
    ok = ok_uniform and shift_err <= 1e-12 and ok_value
    return ok, f"eta=0 uniform {ok_uniform}, shift err {shift_err:.1e}, S=(1,0) -> ({w[0]:.4f}, {w[1]:.4f})"


def crit_sketchy_structure(quick=False):
    capacity = 30
    problems = []
    events = {"fill": 0, "eliminate": 0}

    def observe(event, matrix, window):
        events[event] += 1
        V = matrix.values
        if not np.array_equal(V, -V.T) or np.any(np.diag(V) != 0.0):
            problems.append(f"{event} #{events[event]}: not antisymmetric")
        if len(window) != V.shape[0]:
            problems.append(f"{event} #{events[event]}: size mismatch")
        if event == "eliminate" and len(window) > capacity:
            problems.append(f"occupancy {len(window)} > {capacity}")

    rec = run(RunConfig(kuhn_poker(), method="sf_psro_window", iterations=40, episodes_per_br=2000,
                        window_capacity=capacity, diversity_weight=0.0, seed=3), observer=observe)
    occ = rec.column("window_occupancy")
    if max(occ) > capacity:
        problems.append(f"recorded occupancy {max(occ)}")
    ok = not problems and events["eliminate"] > 0
    return ok, (f"{events['fill']} fills, {events['eliminate']} eliminations, final occupancy {occ[-1]}"
                if ok else "; ".join(problems[:3]) or "no eliminations happened")


def crit_diversity(quick=False):
    rng = np.random.default_rng(17)
    hull = [
        (np.array([1.0, 1.0, 0.0]), [[1, 1, 0], [1, 0, 1]]),
        (np.array([1.0, 0.5, 0.5]), [[1, 1, 0], [1, 0, 1]]),
    ]
    for _ in range(20):
        pts = rng.uniform(0, 1, (3, 3))
        w = rng.dirichlet(np.ones(3))
        hull.append((w @ pts, pts))
    worst_member = max(diversity_bonus(x, pts) for x, pts in hull)
    worst_off = 0.0
    for i in range(30):
        if i < 10:
            d = rng.uniform(0.05, 0.5)
            pts = np.array([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0]])
            x = pts[0] + np.array([0.0, d, -d]) * rng.uniform(0.5, 2.0) + rng.normal(0, 0.3, 3)
        else:
            pts = rng.uniform(-1, 1, (int(rng.integers(1, 3)), 3))
            x = rng.uniform(-2, 2, 3)
        worst_off = max(worst_off, abs(diversity_bonus(x, pts) - oracles.grid_hull_distance(pts, x)))
    ok = worst_member <= 1e-8 and worst_off <= 1e-6
    return ok, f"hull members max {worst_member:.1e}; off-hull vs grid max err {worst_off:.1e}"


def crit_trend(quick=False):
    seeds = range(3 if quick else 5)
    base = dict(iterations=30, episodes_per_br=2000, window_capacity=30, gs_samples_per_profile=50,
                diversity_weight=0.0)
    finals = {}
    for method in ("sf_psro_window", "vanilla_psro", "fsp", "vanilla_sp"):
        finals[method] = float(np.mean([
            run(RunConfig(kuhn_poker(), method=method, seed=s, **base)).column("exploitability")[-1]
            for s in seeds
        ]))
    sf = finals["sf_psro_window"]
    ok_kuhn = sf <= finals["vanilla_sp"] and sf <= finals["fsp"] and sf <= 1.1 * finals["vanilla_psro"]
    game = matrix_game(transitive_cyclic_game())
    ablation = {}
    for N in (3, 10):
        ablation[N] = float(np.mean([
            run(RunConfig(game, method="sf_psro_window", iterations=20, episodes_per_br=2000,
                          window_capacity=N, diversity_weight=0.0, seed=s)).column("exploitability")[-1]
            for s in seeds
        ]))
    ok = ok_kuhn and ablation[3] > ablation[10]
    kuhn = ", ".join(f"{k}={v:.4f}" for k, v in finals.items())
    return ok, f"kuhn means: {kuhn}; ablation N=3 {ablation[3]:.3f} vs N=10 {ablation[10]:.3f}"


DETERMINISM_CONFIG = """\
[game]
id = kuhn_poker

[method]
name = sf_psro_window
iterations = 6
episodes_per_br = 1000

[window]
capacity = 4
"""


def crit_determinism(quick=False):
    from .cli import main

    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "kuhn.cfg"
        cfg.write_text(DETERMINISM_CONFIG, encoding="utf-8")
        codes = [main(["run", str(cfg), "--seed", "5", "--out", str(Path(tmp) / d)]) for d in ("a", "b")]
        same = codes == [0, 0] and filecmp.cmp(Path(tmp) / "a" / "run.csv", Path(tmp) / "b" / "run.csv",
                                                 shallow=False)
    return same, f"exit codes {codes}, run.csv identical: {same}"


CRITERIA = (
    (1, "cost formula", crit_cost, 0.001),
    (2, "Nash solver vs support enumeration", crit_nash_oracle, 30.0),
    (3, "double-oracle convergence", crit_double_oracle, 60.0),
    (4, "Nash clustering layers", crit_clustering, 10.0),
    (5, "bounded-population convergence", crit_bounded_population, 60.0),
    (6, "simulation-free guarantee", crit_simulation_free, None),
    (7, "hedge update", crit_hedge, None),
    (8, "sketchy matrix structure", crit_sketchy_structure, None),
    (9, "diversity bonus", crit_diversity, None),
    (10, "desk-scale trend and window ablation", crit_trend, 600.0),
    (11, "run determinism", crit_determinism, None),
)


@contextlib.contextmanager
def perturbation(name: str | None):
    """Deliberately break one component so the battery can be seen to fail."""
    if name in (None, "none"):
        yield
        return
    if name == "antisymmetry":
        from . import dynamic_window, orchestrator

        real = dynamic_window.fill

        def broken(*args, **kwargs):
            P = real(*args, **kwargs)
            if len(P) > 1:
                P.values[-1, 0] += 1e-3
            return P

        with mock.patch.object(orchestrator, "fill", broken):
            yield
    elif name == "cost":
        real = cost_model.gs_count
        with mock.patch.object(cost_model, "gs_count", lambda *a: real(*a) + 1):
            yield
    elif name == "hedge":
        real = meta_solvers.hedge_update
        with mock.patch.object(meta_solvers, "hedge_update", lambda b, eta: _flipped(real, b, eta)):
            yield
    else:
        raise ValueError(f"unknown perturbation {name!r}; choose antisymmetry, cost or hedge")


def _flipped(real, buffer, eta):
    # rewards losing slots instead of winning ones
    S = buffer.means() if isinstance(buffer, meta_solvers.OutcomeBuffer) else np.asarray(buffer, dtype=float)
    return real(-S, eta)


PERTURBATIONS = ("antisymmetry", "cost", "hedge")


def run_battery(quick: bool = False, only=None, perturb: str | None = None) -> list[Result]:
    results = []
    with perturbation(perturb):
        for cid, title, check, budget in CRITERIA:
            if only is not None and cid not in only:
                continue
            start = time.perf_counter()
            try:
                ok, detail = check(quick)
            except Exception as exc:  # a crashing criterion is a failing criterion
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            elapsed = time.perf_counter() - start
            if budget is not None and cid != 1 and elapsed > budget:
                ok, detail = False, f"{detail}; took {elapsed:.1f}s > {budget:g}s"
            results.append(Result(cid, title, bool(ok), detail, elapsed, budget))
    return results


def format_line(r: Result) -> str:
    return f"[{'PASS' if r.passed else 'FAIL'}] criterion {r.cid:>2} {r.title}: {r.detail} ({r.seconds:.2f}s)"


def format_table(results) -> str:
    lines = [format_line(r) for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} criteria passed")
    return "\n".join(lines)
