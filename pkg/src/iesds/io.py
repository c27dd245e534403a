"""JSON formats for games, hypergraphs, messages, restrictions, formulas and traces.

Players and strategies are referred to by their string labels; every parser
takes the :class:`Game` that fixes the label-to-index mapping. Serializers emit
canonical, sorted output so that files diff cleanly and parse back equal.
"""
from __future__ import annotations

import json
from typing import Any, Iterable, Mapping

from .elimination import Hypergraph, Message, check_message
from .formula import And, Atom, CK, Formula, Or, build_dom, dom_cap
from .game import Game, GameError, PreferenceAtom, Restriction, game_from_payoffs
from .simulator import Conclude, Picture, Send, Terminate, TraceEvent

TRACE_VERSION = 1


def _require(obj: Mapping, key: str, what: str) -> Any:
    if not isinstance(obj, Mapping) or key not in obj:
        raise GameError(f"{what}: missing field {key!r}")
    return obj[key]


# games

def parse_game(obj: Mapping) -> Game:
    players = _require(obj, "players", "game")
    labels = [str(_require(p, "id", "player")) for p in players]
    strategies = [[str(s) for s in _require(p, "strategies", "player")] for p in players]
    has_payoffs, has_atoms = "payoffs" in obj, "atoms" in obj
    if has_payoffs == has_atoms:
        raise GameError("game: give exactly one of 'payoffs' and 'atoms'")
    if has_payoffs:
        table = {}
        for key, us in obj["payoffs"].items():
            table[tuple(s.strip() for s in key.split(","))] = [float(u) for u in us]
        return game_from_payoffs(labels, strategies, table)
    shell = Game(labels, strategies, ())
    return Game(labels, strategies, [parse_atom(a, shell) for a in obj["atoms"]])


def game_to_json(game: Game) -> dict:
    return {
        "players": [{"id": label, "strategies": list(ss)}
                    for label, ss in zip(game.labels, game.strategies)],
        "atoms": [atom_to_json(a, game) for a in game.sorted_atoms()],
    }


def parse_atom(obj: Mapping, game: Game) -> PreferenceAtom:
    return game.atom(_require(obj, "player", "atom"), _require(obj, "context", "atom"),
                     _require(obj, "better", "atom"), _require(obj, "worse", "atom"))


def atom_to_json(a: PreferenceAtom, game: Game) -> dict:
    ss = game.strategies[a.player]
    ctx = {game.labels[j]: game.strategies[j][s]
           for j, s in zip(game.skeleton.opponents(a.player), a.context)}
    return {"player": game.labels[a.player], "context": ctx,
            "better": ss[a.better], "worse": ss[a.worse]}


# hypergraphs and messages

def _group(labels: Iterable, game: Game) -> frozenset[int]:
    return frozenset(game.player_index(str(x)) for x in labels)


def _group_to_json(group: Iterable[int], game: Game) -> list[str]:
    return [game.labels[i] for i in sorted(group)]


def parse_hypergraph(obj: Mapping, game: Game) -> Hypergraph:
    return Hypergraph(game.n, [_group(arc, game) for arc in _require(obj, "arcs", "hypergraph")])


def hypergraph_to_json(h: Hypergraph, game: Game) -> dict:
    return {"arcs": [_group_to_json(arc, game) for arc in h.arcs]}


def parse_message(obj: Mapping, game: Game) -> Message:
    return Message(game.player_index(str(_require(obj, "sender", "message"))),
                   _group(_require(obj, "arc", "message"), game),
                   parse_atom(_require(obj, "atom", "message"), game))


def message_to_json(m: Message, game: Game) -> dict:
    return {"sender": game.labels[m.sender], "arc": _group_to_json(m.arc, game),
            "atom": atom_to_json(m.atom, game)}


def parse_messages(obj: Mapping, game: Game, hypergraph: Hypergraph | None = None) -> list[Message]:
    """Messages in file order; each is checked for truthfulness and legality."""
    out = [parse_message(m, game) for m in _require(obj, "messages", "messages")]
    for m in out:
        check_message(m, game, hypergraph)
    return out


def messages_to_json(messages: Iterable[Message], game: Game) -> dict:
    return {"messages": [message_to_json(m, game) for m in messages]}


# restrictions

def parse_restriction(obj: Mapping, game: Game) -> Restriction:
    return Restriction.from_names(game, _require(obj, "restriction", "outcome"))


def restriction_to_json(r: Restriction, game: Game) -> dict:
    return {"restriction": r.names(game)}


# formulas

def parse_formula(obj: Mapping, game: Game) -> Formula:
    if not isinstance(obj, Mapping) or len(obj) != 1:
        raise GameError(f"formula: expected an object with exactly one key, got {obj!r}")
    (kind, body), = obj.items()
    if kind == "atom":
        return Atom(parse_atom(body, game))
    if kind == "and":
        return And(*(parse_formula(f, game) for f in body))
    if kind == "or":
        return Or(*(parse_formula(f, game) for f in body))
    if kind == "ck":
        return CK(_group(_require(body, "group", "ck"), game), parse_formula(_require(body, "of", "ck"), game))
    if kind == "dom":
        i = game.player_index(str(_require(body, "player", "dom")))
        s = game.strategy_index(i, str(_require(body, "strategy", "dom")))
        cap = dom_cap(game.skeleton)
        level = body.get("level", "inf")
        level = cap if level == "inf" else int(level)
        if not 1 <= level:
            raise GameError("dom: level must be positive or 'inf'")
        return build_dom(level, i, s, game.skeleton)
    raise GameError(f"formula: unknown connective {kind!r}")


def formula_to_json(f: Formula, game: Game) -> dict:
    """Expanded form (no ``dom`` shorthand); shared sub-formulas are repeated."""
    if f.kind == "atom":
        return {"atom": atom_to_json(f.atom, game)}
    if f.kind in ("and", "or"):
        return {f.kind: [formula_to_json(c, game) for c in f.children]}
    return {"ck": {"group": _group_to_json(f.group, game), "of": formula_to_json(f.children[0], game)}}


# traces

def event_to_json(e: TraceEvent, game: Game) -> dict:
    out: dict[str, Any] = {"v": TRACE_VERSION, "round": e.round}
    if isinstance(e, Send):
        out.update(type="send", sender=game.labels[e.sender], arc=_group_to_json(e.arc, game),
                   atom=atom_to_json(e.atom, game))
    elif isinstance(e, Conclude):
        out.update(type="conclude", player=game.labels[e.player],
                   chain=[game.labels[k] for k in e.chain], target=game.labels[e.target],
                   strategy=game.strategies[e.target][e.strategy], verdict=e.verdict)
    elif isinstance(e, Picture):
        out.update(type="picture", player=game.labels[e.player], restriction=e.restriction.names(game))
    elif isinstance(e, Terminate):
        out.update(type="terminate", player=game.labels[e.player])
    else:
        raise TypeError(f"not a trace event: {e!r}")
    return out


def parse_event(obj: Mapping, game: Game) -> TraceEvent:
    if obj.get("v") != TRACE_VERSION:
        raise GameError(f"unsupported trace version {obj.get('v')!r}")
    rnd = int(_require(obj, "round", "event"))
    kind = _require(obj, "type", "event")
    if kind == "send":
        return Send(rnd, game.player_index(obj["sender"]), _group(obj["arc"], game),
                    parse_atom(obj["atom"], game))
    if kind == "conclude":
        target = game.player_index(obj["target"])
        return Conclude(rnd, game.player_index(obj["player"]),
                        tuple(game.player_index(k) for k in obj["chain"]), target,
                        game.strategy_index(target, obj["strategy"]), bool(obj["verdict"]))
    if kind == "picture":
        return Picture(rnd, game.player_index(obj["player"]),
                       Restriction.from_names(game, obj["restriction"]))
    if kind == "terminate":
        return Terminate(rnd, game.player_index(obj["player"]))
    raise GameError(f"unknown trace event type {kind!r}")


def dumps_trace(events: Iterable[TraceEvent], game: Game) -> str:
    return "".join(json.dumps(event_to_json(e, game), sort_keys=True) + "\n" for e in events)


def loads_trace(text: str, game: Game) -> list[TraceEvent]:
    return [parse_event(json.loads(line), game) for line in text.splitlines() if line.strip()]


def load_json(path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def dumps(obj: Any) -> str:
    return json.dumps(obj) + "\n"
