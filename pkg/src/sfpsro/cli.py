"""Command-line entry point: ``run``, ``cluster``, ``cost`` and ``suite``."""
from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import echo_config, load_config
from .cost_model import cumulative_breakdown
from .dynamic_window import (
    cluster_rpps,
    is_antisymmetric,
    nash_clustering,
    read_matrix_csv,
    select_elimination,
    write_matrix_csv,
)
from .errors import ConfigError, SolverError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3
ANTISYMMETRY_TOL = 1e-6


def _err(msg):
    print(f"sfpsro: {msg}", file=sys.stderr)


def _run_one(config_path, seed, out_dir):
    """Execute one configured run and write its three output files."""
    from .orchestrator import run

    cfg = load_config(config_path, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    record = run(cfg)
    record.to_csv(out / "run.csv")
    write_matrix_csv(out / "window.csv", record.matrix, record.window.ages)
    (out / "config.echo").write_text(echo_config(cfg), encoding="utf-8")
    final = record.rows[-1]
    summary = f"seed {cfg.seed}: {cfg.method} on {cfg.game.game_id}, {final[0]} iterations"
    if final[4] is not None:
        summary += f", exploitability {final[4]:.6g}"
        if cfg.game.game_id == "goofspiel":
            # win/loss returns in {0, 1} are (r + 1) / 2, which halves every gap
            summary += f" (win/loss 0/1 scale {final[4] / 2:.6g})"
    return summary


def _run_guarded(config_path, seed, out_dir):
    try:
        return EXIT_OK, _run_one(config_path, seed, out_dir)
    except ConfigError as exc:
        return EXIT_CONFIG, f"config error: {exc}"
    except (SolverError, ArithmeticError, ValueError, OSError) as exc:
        return EXIT_RUNTIME, f"runtime error: {type(exc).__name__}: {exc}"


def cmd_run(args) -> int:
    if args.parallel < 1:
        _err("--parallel must be >= 1")
        return EXIT_CONFIG
    try:
        base = load_config(args.config, args.seed)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    if args.parallel == 1:
        jobs = [(args.config, base.seed, args.out)]
    else:
        jobs = [(args.config, base.seed + r, str(Path(args.out) / f"seed_{base.seed + r}"))
                for r in range(args.parallel)]
    if len(jobs) == 1:
        results = [_run_guarded(*jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            results = list(pool.map(_run_guarded, *zip(*jobs)))
    code = EXIT_OK
    for status, message in results:
        if status == EXIT_OK:
            print(message)
        else:
            _err(message)
            code = max(code, status)
    return code


def cmd_cluster(args) -> int:
    try:
        V, ages = read_matrix_csv(args.matrix)
    except (OSError, ValueError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    if not is_antisymmetric(V, ANTISYMMETRY_TOL):
        _err(f"{args.matrix}: matrix is not antisymmetric within {ANTISYMMETRY_TOL:g}")
        return EXIT_CONFIG
    # symmetrize away sub-tolerance noise before solving
    V = 0.5 * (V - V.T)
    try:
        res = nash_clustering(V)
        rpps = cluster_rpps(V, res)
    except SolverError as exc:
        _err(f"runtime error: {exc}")
        return EXIT_RUNTIME
    chosen = select_elimination(res, ages)
    for i, c in enumerate(res.clusters):
        weights = " ".join(f"{w:.6f}" for w in c.weights)
        slots = " ".join(str(s) for s in c.slots)
        print(f"layer {i}: slots [{slots}] ages [{' '.join(str(ages[s]) for s in c.slots)}] weights [{weights}]")
    for i, r in enumerate(rpps):
        print(f"rpp layer {i} vs {i + 1}: {r:.6f}")
    print(f"eliminate: slot {chosen} (age {ages[chosen]})")
    return EXIT_OK


def cmd_cost(args) -> int:
    try:
        rows = cumulative_breakdown(args.iterations, args.players, args.k, args.br_episodes)
    except (SolverError, ValueError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["iteration", "gs_sims", "brs_episodes", "gs_fraction"])
    for r in rows:
        w.writerow([r.iteration, r.gs_sims, r.brs_episodes, repr(r.gs_fraction)])
    return EXIT_OK


def cmd_suite(args) -> int:
    from .acceptance import format_line, run_battery

    results = run_battery(quick=not args.full, perturb=args.inject)
    for r in results:
        print(format_line(r))
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sfpsro", description="Simulation-free PSRO with a dynamic window.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="execute a configured experiment")
    r.add_argument("config")
    r.add_argument("--seed", type=int, default=None, help="override the configured seed")
    r.add_argument("--out", default=".", help="output directory")
    r.add_argument("--parallel", type=int, default=1, help="run this many consecutive seeds concurrently")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("cluster", help="Nash-cluster a dumped sketchy matrix")
    c.add_argument("matrix")
    c.set_defaults(func=cmd_cluster)

    k = sub.add_parser("cost", help="emit the game-simulation cost breakdown as CSV")
    k.add_argument("--players", type=int, default=2)
    k.add_argument("--iterations", type=int, default=10)
    k.add_argument("--k", type=int, default=1000)
    k.add_argument("--br-episodes", type=int, default=10_000)
    k.set_defaults(func=cmd_cost)

    s = sub.add_parser("suite", help="run the acceptance battery")
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--quick", action="store_true", help="reduced seed count (default)")
    mode.add_argument("--full", action="store_true", help="full seed count")
    s.add_argument("--inject", default=None, metavar="NAME",
                   help="break one component on purpose: antisymmetry, cost or hedge")
    s.set_defaults(func=cmd_suite)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
