"""Cross-checks that tie the operator, epistemic and protocol views together.

Each check returns a :class:`CheckResult`; a failing check carries the first
counterexample found in human-readable form.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .elimination import (Hypergraph, IntermediateSolver, Message, all_messages, closure_intersections,
                          entailed_atoms, iterate_intermediate, iterate_to_fixpoint,
                          lg_agreement_violations, outcome_complete)
from .epistemic import Caps, StateUniverse, epistemic_outcome
from .formula import CapExceeded
from .game import Game, Notion, PreferenceTable
from .simulator import Seeded, run, verify_run


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # "pass" | "fail" | "skipped"
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "fail"


def _fmt(game: Game, r) -> str:
    return str(r.names(game))


def check_lg_sequences(game: Game, hypergraph: Hypergraph,
                       message_sets: Iterable[Iterable[Message]] = ()) -> CheckResult:
    """Local and global dominance keep the same strategies along every fixpoint iteration."""
    name = "local/global agreement along iterations"
    arcs = [frozenset(range(game.n))] + list(hypergraph.arcs)
    for notion in Notion:
        for arc in arcs:
            seq = []
            iterate_to_fixpoint(arc, notion, game, seq.append)
            bad = lg_agreement_violations(game, seq)
            if bad:
                k, i = bad[0]
                return CheckResult(name, "fail", f"arc {sorted(arc)}, {notion.value}, round {k}, player {game.labels[i]}")
    closed = closure_intersections(hypergraph)
    for messages in message_sets:
        messages = frozenset(messages)
        for arc in closed.arcs:
            if len(arc) < 2:
                continue
            table = PreferenceTable.from_atoms(game.skeleton, entailed_atoms(messages, arc))
            for notion in Notion:
                seq = []
                iterate_intermediate(arc, messages, notion, game, seq.append)
                bad = lg_agreement_violations(game, seq, table)
                if bad:
                    k, i = bad[0]
                    return CheckResult(name, "fail", f"arc {sorted(arc)} with {len(messages)} messages, "
                                                     f"{notion.value}, round {k}, player {game.labels[i]}")
    return CheckResult(name, "pass")


def check_customary_inclusion(game: Game, hypergraph: Hypergraph) -> CheckResult:
    """Full-group elimination never keeps more than elimination under ``hypergraph``."""
    name = "customary outcome included in outcome"
    for notion in Notion:
        customary = iterate_to_fixpoint(range(game.n), notion, game)
        out = outcome_complete(hypergraph, notion, game)
        if not customary <= out:
            return CheckResult(name, "fail", f"{notion.value}: {_fmt(game, customary)} not within {_fmt(game, out)}")
    return CheckResult(name, "pass")


def check_notion_invariance(game: Game, hypergraph: Hypergraph,
                            message_sets: Iterable[Iterable[Message]]) -> CheckResult:
    name = "outcome independent of the dominance notion"
    loc = outcome_complete(hypergraph, Notion.LOCAL, game)
    glo = outcome_complete(hypergraph, Notion.GLOBAL, game)
    if loc != glo:
        return CheckResult(name, "fail", f"complete: local {_fmt(game, loc)}, global {_fmt(game, glo)}")
    sl = IntermediateSolver(game, hypergraph, Notion.LOCAL)
    sg = IntermediateSolver(game, hypergraph, Notion.GLOBAL)
    for messages in message_sets:
        messages = list(messages)
        loc, glo = sl.outcome(messages), sg.outcome(messages)
        if loc != glo:
            return CheckResult(name, "fail", f"{len(messages)} messages: local {_fmt(game, loc)}, global {_fmt(game, glo)}")
    return CheckResult(name, "pass")


def check_epistemic_outcome(game: Game, hypergraph: Hypergraph,
                            message_sets: Iterable[Iterable[Message]], caps: Caps = Caps()) -> CheckResult:
    """Operator outcome equals the outcome read off the epistemic model."""
    name = "operator outcome equals epistemic outcome"
    try:
        universe = StateUniverse(game.skeleton, hypergraph, caps)
    except CapExceeded as e:
        return CheckResult(name, "skipped", str(e))
    solver = IntermediateSolver(game, hypergraph, Notion.GLOBAL)
    for messages in message_sets:
        messages = frozenset(messages)
        op = solver.outcome(messages)
        ep = epistemic_outcome(game, hypergraph, messages, universe=universe)
        if op != ep:
            return CheckResult(name, "fail", f"{len(messages)} messages: operators {_fmt(game, op)}, "
                                             f"epistemic {_fmt(game, ep)}")
    return CheckResult(name, "pass")


def check_run(game: Game, hypergraph: Hypergraph, seed: int) -> CheckResult:
    """A seeded exhaustive protocol run agrees with the operators at every round."""
    name = "protocol run agrees with operators"
    report = verify_run(run(game, hypergraph, Seeded(seed)), game, hypergraph)
    if not report.passed:
        return CheckResult(name, "fail", report.first_divergence or "")
    return CheckResult(name, "pass", f"{report.checks} comparisons")


def verify_all(game: Game, hypergraph: Hypergraph, messages: Iterable[Message] | None = None,
               caps: Caps = Caps(), seed: int = 0) -> list[CheckResult]:
    """Run every check; message-dependent checks use ``messages`` plus the empty and complete sets."""
    sets = [frozenset(), all_messages(hypergraph, game)]
    if messages is not None:
        sets.append(frozenset(messages))
    return [
        check_lg_sequences(game, hypergraph, sets),
        check_customary_inclusion(game, hypergraph),
        check_notion_invariance(game, hypergraph, sets),
        check_epistemic_outcome(game, hypergraph, sets, caps),
        check_run(game, hypergraph, seed),
    ]
