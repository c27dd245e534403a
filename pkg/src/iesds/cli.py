"""Command-line front end: ``iesds solve|check|simulate|verify``.

Exit codes: 0 success, 1 invalid input or unsupported query, 2 size cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import io
from .elimination import Hypergraph, IntermediateSolver, outcome_complete
from .epistemic import Caps, StateUniverse, game_state
from .formula import CapExceeded
from .game import Game, GameError, Notion, validate_game
from .knowledge import PlayerLocalState, UnsupportedQuery
from .simulator import run, schedule_from
from .verify import verify_all

EXIT_OK, EXIT_INVALID, EXIT_CAP = 0, 1, 2
SEED_ENV = "IESDS_NET_SEED"


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="iesds", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, caps=False):
        sp.add_argument("--game", required=True, type=Path, help="game JSON file")
        sp.add_argument("--hypergraph", required=True, type=Path, help="hypergraph JSON file")
        sp.add_argument("--notion", choices=[n.value for n in Notion], default=Notion.GLOBAL.value)
        sp.add_argument("--out", type=Path, help="write output here instead of stdout")
        if caps:
            sp.add_argument("--caps-atoms", type=int, default=Caps.atoms)
            sp.add_argument("--caps-states", type=int, default=Caps.states)

    sp = sub.add_parser("solve", help="outcome after complete or partial communication")
    common(sp)
    sp.add_argument("--messages", type=Path, help="messages JSON; omit for complete communication")

    sp = sub.add_parser("check", help="evaluate a formula at the game's state")
    common(sp, caps=True)
    sp.add_argument("--formula", required=True, type=Path)
    sp.add_argument("--messages", type=Path)
    sp.add_argument("--algorithmic", action="store_true", help="use a player's local decision procedure")
    sp.add_argument("--player", help="evaluating player (required with --algorithmic)")

    sp = sub.add_parser("simulate", help="run the message-passing protocol and write a JSONL trace")
    common(sp)
    sp.add_argument("--script", type=Path, help="messages JSON to replay in order")
    sp.add_argument("--seed", type=int, help=f"seed for random messages (fallback: ${SEED_ENV})")

    sp = sub.add_parser("verify", help="cross-check operators, epistemic model and protocol")
    common(sp, caps=True)
    sp.add_argument("--messages", type=Path)
    sp.add_argument("--seed", type=int)
    return p


def _seed(args) -> int | None:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return None
    try:
        return int(env)
    except ValueError:
        raise GameError(f"${SEED_ENV} must be an integer, got {env!r}") from None


def _caps(args) -> Caps:
    if args.caps_atoms < 1 or args.caps_states < 1:
        raise GameError("caps must be positive")
    return Caps(args.caps_atoms, args.caps_states)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _load(args) -> tuple[Game, Hypergraph]:
    game = io.parse_game(io.load_json(args.game))
    violations = validate_game(game)
    if violations:
        v = violations[0]
        raise GameError(f"preferences of player {game.labels[v.player]} violate {v.kind} "
                        f"({len(violations)} violation(s) in total)")
    return game, io.parse_hypergraph(io.load_json(args.hypergraph), game)


def cmd_solve(args) -> int:
    game, h = _load(args)
    if args.messages is None:
        r = outcome_complete(h, args.notion, game)
    else:
        messages = io.parse_messages(io.load_json(args.messages), game, h)
        r = IntermediateSolver(game, h, args.notion).outcome(messages)
    _emit(io.dumps(io.restriction_to_json(r, game)), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    game, h = _load(args)
    messages = [] if args.messages is None else io.parse_messages(io.load_json(args.messages), game, h)
    formula = io.parse_formula(io.load_json(args.formula), game)
    if args.algorithmic:
        if args.player is None:
            raise GameError("--algorithmic needs --player")
        i = game.player_index(args.player)
        local = PlayerLocalState.initial(game, i, h)
        for m in messages:
            if i in m.arc:
                local = local.observe(m)
        value = local.evaluate(formula)
        mode = "algorithmic"
    else:
        universe = StateUniverse(game.skeleton, h, _caps(args))
        value = universe.models(game_state(game, messages), formula)
        mode = "model"
    result = {"value": value, "mode": mode}
    if args.algorithmic:
        result["player"] = args.player
    _emit(io.dumps(result), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    game, h = _load(args)
    script = None if args.script is None else io.parse_messages(io.load_json(args.script), game, h)
    result = run(game, h, schedule_from(script, _seed(args)))
    _emit(io.dumps_trace(result.trace, game), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    game, h = _load(args)
    messages = None if args.messages is None else io.parse_messages(io.load_json(args.messages), game, h)
    seed = _seed(args)
    results = verify_all(game, h, messages, _caps(args), 0 if seed is None else seed)
    lines = []
    for r in results:
        line = f"{r.status.upper():7} {r.name}"
        if r.detail:
            line += f": {r.detail}"
        lines.append(line + "\n")
    _emit("".join(lines), args.out)
    return EXIT_OK if all(r.ok for r in results) else EXIT_INVALID


COMMANDS = {"solve": cmd_solve, "check": cmd_check, "simulate": cmd_simulate, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CapExceeded as e:
        print(f"iesds: {e}", file=sys.stderr)
        return EXIT_CAP
    except (GameError, UnsupportedQuery, ValueError, KeyError, TypeError, json.JSONDecodeError, OSError) as e:
        print(f"iesds: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
