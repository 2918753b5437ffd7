"""INI-style run configuration with line-numbered validation errors.

Sections and keys::

    [game]     id, num_players, num_cards, matrix
    [method]   name, iterations, episodes_per_br, scale, n_outer, m_inner,
               gs_samples_per_profile, br_mode, gs_mode, eval_meta, eta, eps_mix,
               carry_hedge, nash_tol, population_bound, seed
    [learner]  epsilon, gamma, reset_learner, diversity_weight
    [window]   capacity, fill_tail_fraction
    [output]   episode_cost_s

``matrix`` rows are separated by ``;`` and entries by ``,``.
"""
from __future__ import annotations

from dataclasses import replace

from .errors import ConfigError, SolverError
from .games import GameSpec, goofspiel, kuhn_poker, leduc_poker, matrix_game
from .orchestrator import RunConfig


def _bool(text):
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _opt_int(text):
    return None if text.lower() in ("auto", "none", "") else int(text)


def _matrix(text):
    rows = [r for r in text.split(";") if r.strip()]
    return tuple(tuple(float(v) for v in r.split(",")) for r in rows)


# (section, key) -> (RunConfig field or game parameter, parser)
SCHEMA = {
    ("game", "id"): ("game_id", str),
    ("game", "num_players"): ("num_players", int),
    ("game", "num_cards"): ("num_cards", int),
    ("game", "matrix"): ("matrix", _matrix),
    ("method", "name"): ("method", str),
    ("method", "iterations"): ("iterations", int),
    ("method", "episodes_per_br"): ("episodes_per_br", int),
    ("method", "scale"): ("scale", float),
    ("method", "n_outer"): ("n_outer", int),
    ("method", "m_inner"): ("m_inner", _opt_int),
    ("method", "gs_samples_per_profile"): ("gs_samples_per_profile", int),
    ("method", "br_mode"): ("br_mode", str),
    ("method", "gs_mode"): ("gs_mode", str),
    ("method", "eval_meta"): ("eval_meta", str),
    ("method", "eta"): ("eta", float),
    ("method", "eps_mix"): ("eps_mix", float),
    ("method", "carry_hedge"): ("carry_hedge", _bool),
    ("method", "nash_tol"): ("nash_tol", float),
    ("method", "population_bound"): ("population_bound", int),
    ("method", "seed"): ("seed", int),
    ("learner", "epsilon"): ("learner_epsilon", float),
    ("learner", "gamma"): ("gamma", float),
    ("learner", "reset_learner"): ("reset_learner", _bool),
    ("learner", "diversity_weight"): ("diversity_weight", float),
    ("window", "capacity"): ("window_capacity", int),
    ("window", "fill_tail_fraction"): ("fill_tail_fraction", float),
    ("output", "episode_cost_s"): ("episode_cost_s", float),
}
SECTIONS = ("game", "method", "learner", "window", "output")
GAME_KEYS = ("game_id", "num_players", "num_cards", "matrix")


def _build_game(values, lines):
    gid = values.get("game_id")
    if gid is None:
        raise ConfigError("[game] id is required")
    line = lines.get("game_id")
    try:
        if gid == "matrix":
            if "matrix" not in values:
                raise ConfigError("[game] matrix is required for matrix games", line)
            return matrix_game(values["matrix"])
        if gid == "kuhn_poker":
            return kuhn_poker()
        if gid == "leduc_poker":
            return leduc_poker()
        if gid == "goofspiel":
            return goofspiel(values.get("num_cards", 5), values.get("num_players", 2))
    except ConfigError:
        raise
    except (SolverError, ValueError) as exc:
        raise ConfigError(str(exc), line) from exc
    raise ConfigError(f"unknown game id {gid!r}", line)


def parse_config(text: str, seed: int | None = None) -> RunConfig:
    values, lines = {}, {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw.strip()!r}", lineno)
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if section is None:
            raise ConfigError("key outside any section", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        entry = SCHEMA.get((section, key))
        if entry is None:
            raise ConfigError(f"unknown key {key!r} in [{section}]", lineno)
        name, parse = entry
        if name in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            values[name] = parse(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from exc
        lines[name] = lineno
    game = _build_game(values, lines)
    kwargs = {k: v for k, v in values.items() if k not in GAME_KEYS}
    if seed is not None:
        kwargs["seed"] = seed
    try:
        return RunConfig(game=game, **kwargs)
    except ConfigError as exc:
        # attribute the failure to the first key it names, when possible
        msg = str(exc)
        for name, lineno in sorted(lines.items(), key=lambda kv: kv[1]):
            if msg.startswith(name) or f" {name} " in msg:
                raise ConfigError(msg, lineno) from exc
        raise


def load_config(path, seed: int | None = None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text, seed)


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def echo_config(cfg: RunConfig) -> str:
    """Fully resolved configuration in the same format; parses back to ``cfg``."""
    g: GameSpec = cfg.game
    out = ["[game]", f"id = {g.game_id}", f"num_players = {g.num_players}"]
    if g.game_id == "matrix":
        rows = ";".join(",".join(repr(float(v)) for v in row) for row in g.payoff_matrix)
        out.append(f"matrix = {rows}")
    if g.game_id == "goofspiel":
        out.append(f"num_cards = {g.param('num_cards')}")
    resolved = replace(cfg, m_inner=cfg.m)
    by_section = {}
    for (section, key), (name, _) in SCHEMA.items():
        if section == "game":
            continue
        by_section.setdefault(section, []).append(f"{key} = {_fmt(getattr(resolved, name))}")
    for section in SECTIONS[1:]:
        out.append("")
        out.append(f"[{section}]")
        out.extend(by_section[section])
    return "\n".join(out) + "\n"
