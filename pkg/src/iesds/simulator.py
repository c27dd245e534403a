"""Deterministic lock-step simulation of the distributed elimination protocol.

Each round delivers exactly one truthful message to every member of its arc at
once. Every recipient then re-evaluates its knowledge queries and the trace
records the queries that just became true, together with the player's updated
picture of the game. Round 0 is the private deliberation before any message.

Seeded schedules draw the next message uniformly from the unsent remainder of
all possible messages, sorted canonically. The draw uses numpy's PCG64 bit
generator: ``index = random_raw() % remaining``. The raw PCG64 stream is fixed
for a given seed, so traces reproduce across platforms and numpy versions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .elimination import (Hypergraph, IntermediateSolver, Message, all_messages,
                          check_message, outcome_complete)
from .formula import K, build_dom, dom_cap
from .game import Game, GameError, Notion, Restriction, validate_game
from .knowledge import PlayerLocalState


@dataclass(frozen=True)
class Seeded:
    seed: int


@dataclass(frozen=True)
class Scripted:
    """Replay ``messages`` in order; optionally continue with a seeded remainder."""

    messages: tuple[Message, ...]
    continue_seed: int | None = None


Schedule = Union[Seeded, Scripted]


@dataclass(frozen=True)
class Send:
    round: int
    sender: int
    arc: frozenset[int]
    atom: object


@dataclass(frozen=True)
class Conclude:
    """``player`` concludes ``K_{chain[0]} ... K_{chain[-1]}`` that ``strategy`` is eliminated.

    ``chain`` ends with ``target``, the owner of ``strategy``.
    """

    round: int
    player: int
    chain: tuple[int, ...]
    target: int
    strategy: int
    verdict: bool = True


@dataclass(frozen=True)
class Picture:
    round: int
    player: int
    restriction: Restriction


@dataclass(frozen=True)
class Terminate:
    round: int
    player: int


TraceEvent = Union[Send, Conclude, Picture, Terminate]


@dataclass
class SimulationResult:
    trace: list[TraceEvent]
    final_pictures: tuple[Restriction, ...]
    sent: tuple[Message, ...]
    # own-component mask of every player after each round, round 0 first
    history: list[tuple[int, ...]] = field(default_factory=list)
    exhaustive: bool = False

    @property
    def messages_sent(self) -> frozenset[Message]:
        return frozenset(self.sent)


class _Player:
    def __init__(self, game: Game, i: int, hypergraph: Hypergraph):
        self.i = i
        self.skeleton = game.skeleton
        self.level = dom_cap(self.skeleton)
        self.local = PlayerLocalState.initial(game, i, hypergraph)
        self.queries = []
        sk = self.skeleton
        for j, k in enumerate(sk.sizes):
            for s in range(k):
                base = build_dom(self.level, j, s, sk)
                self.queries.append(((j,), j, s, base))
                if j == i:
                    for other in range(sk.n):
                        if other != i:
                            self.queries.append(((other, i), j, s, K(other, base)))
        self.known: set[tuple[tuple[int, ...], int, int]] = set()
        self.picture = Restriction.full(sk.sizes)

    def deliberate(self, rnd: int, out: list[TraceEvent]) -> None:
        for chain, j, s, f in self.queries:
            key = (chain, j, s)
            if key in self.known or not self.local.evaluate(f):
                continue
            self.known.add(key)
            out.append(Conclude(rnd, self.i, chain, j, s))
            if len(chain) == 1:
                self.picture = self.picture.replace(j, self.picture.masks[j] & ~(1 << s))
                out.append(Picture(rnd, self.i, self.picture))


def _rng_draw(rng: np.random.Generator, n: int) -> int:
    return int(rng.bit_generator.random_raw()) % n


def run(game: Game, hypergraph: Hypergraph, schedule: Schedule) -> SimulationResult:
    """Simulate the protocol under ``schedule`` and return the trace."""
    if validate_game(game):
        raise GameError("game preferences are not strict partial orders")
    if hypergraph.n != game.n:
        raise GameError("hypergraph and game have different numbers of players")
    universe = sorted(all_messages(hypergraph, game), key=Message.sort_key)
    players = [_Player(game, i, hypergraph) for i in range(game.n)]
    trace: list[TraceEvent] = []
    for p in players:
        p.deliberate(0, trace)
    history = [tuple(p.picture.masks[p.i] for p in players)]

    script: list[Message] = []
    seed = None
    if isinstance(schedule, Scripted):
        seen = set()
        for m in schedule.messages:
            check_message(m, game, hypergraph)
            if m in seen:
                raise GameError(f"duplicate scripted message: {game.describe(m.atom)}")
            seen.add(m)
            script.append(m)
        seed = schedule.continue_seed
    elif isinstance(schedule, Seeded):
        seed = schedule.seed
    else:
        raise TypeError(f"unknown schedule {schedule!r}")

    sent: list[Message] = []
    sent_set: set[Message] = set()
    rng = np.random.Generator(np.random.PCG64(seed)) if seed is not None else None
    remaining = [m for m in universe if m not in set(script)]

    def deliver(msg: Message) -> None:
        rnd = len(sent) + 1
        sent.append(msg)
        sent_set.add(msg)
        trace.append(Send(rnd, msg.sender, msg.arc, msg.atom))
        # barrier: every recipient observes before anyone deliberates
        for p in players:
            if p.i in msg.arc:
                p.local = p.local.observe(msg)
        for p in players:
            if p.i in msg.arc:
                p.deliberate(rnd, trace)
        history.append(tuple(p.picture.masks[p.i] for p in players))

    for msg in script:
        deliver(msg)
    if rng is not None:
        while remaining:
            deliver(remaining.pop(_rng_draw(rng, len(remaining))))
    last = len(sent)
    for p in players:
        trace.append(Terminate(last, p.i))
    return SimulationResult(trace, tuple(p.picture for p in players), tuple(sent), history,
                            exhaustive=sent_set == set(universe))


@dataclass
class VerifyReport:
    passed: bool
    checks: int
    first_divergence: str | None = None


def verify_run(result: SimulationResult, game: Game, hypergraph: Hypergraph) -> VerifyReport:
    """Cross-check a run against the elimination operators.

    At every prefix of the sent messages each player's own component must equal
    the intermediate outcome; an exhaustive run must end at the complete outcome.
    """
    solver = IntermediateSolver(game, hypergraph, Notion.GLOBAL)
    checks = 0
    for t, own in enumerate(result.history):
        expected = solver.outcome(result.sent[:t])
        for i in range(game.n):
            checks += 1
            if own[i] != expected.masks[i]:
                got = [game.strategies[i][s] for s in range(game.sizes[i]) if own[i] >> s & 1]
                want = expected.names(game)[game.labels[i]]
                return VerifyReport(False, checks, f"round {t}, player {game.labels[i]}: picture {got}, outcome {want}")
    for i in range(game.n):
        prev = None
        for t, own in enumerate(result.history):
            if prev is not None and own[i] & ~prev:
                return VerifyReport(False, checks, f"round {t}, player {game.labels[i]} regained a strategy")
            prev = own[i]
    if result.exhaustive:
        complete = outcome_complete(hypergraph, Notion.GLOBAL, game)
        for i in range(game.n):
            checks += 1
            if result.final_pictures[i].masks[i] != complete.masks[i]:
                return VerifyReport(False, checks, f"final picture of player {game.labels[i]} differs from the complete outcome")
    return VerifyReport(True, checks)


def replay_prefixes(game: Game, hypergraph: Hypergraph, messages: Sequence[Message]) -> list[Restriction]:
    """Intermediate outcome after each prefix of ``messages`` (empty prefix first)."""
    solver = IntermediateSolver(game, hypergraph, Notion.GLOBAL)
    return [solver.outcome(messages[:t]) for t in range(len(messages) + 1)]


def schedule_from(messages: Iterable[Message] | None, seed: int | None) -> Schedule:
    if messages is None:
        if seed is None:
            raise ValueError("either a script or a seed is required")
        return Seeded(seed)
    return Scripted(tuple(messages), seed)
