"""Elimination operators on hyperarcs, their fixpoints and the resulting outcomes.

``apply_T`` removes, for the members of one hyperarc, every strategy that is
strictly dominated on the current restriction. ``apply_T_intermediate`` does
the same using only what the members jointly received in a message set.
``outcome_complete`` and ``outcome_intermediate`` combine the per-arc
fixpoints with a final private elimination step for each player.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from .game import (Game, GameError, Notion, PreferenceAtom, PreferenceTable,
                   Restriction, Skeleton)

Arc = frozenset  # frozenset[int] of player indices


def _arc_key(arc: frozenset[int]) -> tuple[int, tuple[int, ...]]:
    return (len(arc), tuple(sorted(arc)))


@dataclass(frozen=True)
class Hypergraph:
    """Interaction structure: a set of non-empty player sets."""

    n: int
    arcs: tuple[frozenset[int], ...]

    def __init__(self, n: int, arcs: Iterable[Iterable[int]]):
        clean = set()
        for arc in arcs:
            arc = frozenset(int(i) for i in arc)
            if not arc:
                raise GameError("hyperarcs must be non-empty")
            if not all(0 <= i < n for i in arc):
                raise GameError(f"hyperarc {sorted(arc)} contains an unknown player")
            clean.add(arc)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "arcs", tuple(sorted(clean, key=_arc_key)))

    def __iter__(self):
        return iter(self.arcs)

    def __len__(self) -> int:
        return len(self.arcs)

    def __contains__(self, arc) -> bool:
        return frozenset(arc) in self.arcs

    def containing(self, i: int) -> list[frozenset[int]]:
        return [a for a in self.arcs if i in a]

    def covers(self, group: Iterable[int]) -> bool:
        """Is ``group`` a subset of some hyperarc?"""
        group = frozenset(group)
        return any(group <= a for a in self.arcs)


@dataclass(frozen=True)
class Message:
    """``sender`` announces ``atom`` to every member of ``arc``."""

    sender: int
    arc: frozenset[int]
    atom: PreferenceAtom

    def sort_key(self):
        return (self.atom, _arc_key(self.arc), self.sender)


def check_message(msg: Message, game: Game, hypergraph: Hypergraph | None = None) -> None:
    """Raise :class:`GameError` unless ``msg`` is a legal, truthful message."""
    if msg.atom.player != msg.sender:
        raise GameError(f"message by {msg.sender} states another player's preference")
    if msg.sender not in msg.arc:
        raise GameError(f"sender {game.labels[msg.sender]} is not in arc {sorted(msg.arc)}")
    if hypergraph is not None and msg.arc not in hypergraph.arcs:
        raise GameError(f"arc {[game.labels[i] for i in sorted(msg.arc)]} is not a hyperarc")
    if msg.atom not in game.atoms:
        raise GameError(f"untruthful message: {game.describe(msg.atom)}")


def check_messages(messages: Iterable[Message], game: Game,
                   hypergraph: Hypergraph | None = None) -> frozenset[Message]:
    out = frozenset(messages)
    for m in sorted(out, key=Message.sort_key):
        check_message(m, game, hypergraph)
    return out


def closure_intersections(hypergraph: Hypergraph) -> Hypergraph:
    """Smallest superset of the arcs closed under non-empty pairwise intersection."""
    return _closure(hypergraph)


@lru_cache(maxsize=4096)
def _closure(hypergraph: Hypergraph) -> Hypergraph:
    arcs = set(hypergraph.arcs)
    frontier = set(arcs)
    while frontier:
        new = set()
        for a in frontier:
            for b in arcs:
                c = a & b
                if c and c not in arcs:
                    new.add(c)
        arcs |= new
        frontier = new
    return Hypergraph(hypergraph.n, arcs)


def all_messages(hypergraph: Hypergraph, game: Game) -> frozenset[Message]:
    """Every truthful atom of every player, sent to every hyperarc containing that player."""
    return frozenset(Message(a.player, arc, a)
                     for a in game.atoms for arc in hypergraph.arcs if a.player in arc)


def _transitive_closure(edges: set[tuple[int, int]]) -> set[tuple[int, int]]:
    succ: dict[int, set[int]] = {}
    for b, w in edges:
        succ.setdefault(b, set()).add(w)
    out = set()
    for start in succ:
        seen = set()
        stack = [start]
        while stack:
            for nxt in succ.get(stack.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        out.update((start, w) for w in seen)
    return out


def entailed_atoms(messages: Iterable[Message], audience: Iterable[int]) -> set[PreferenceAtom]:
    """All atoms entailed by the messages received by every member of ``audience``.

    An atom is entailed when a chain of qualifying messages about the same
    player and context links its better strategy to its worse one; this is
    reachability in the per-context digraph of received statements.
    """
    audience = frozenset(audience)
    graphs: dict[tuple[int, tuple[int, ...]], set[tuple[int, int]]] = {}
    for m in messages:
        if audience <= m.arc:
            a = m.atom
            graphs.setdefault((a.player, a.context), set()).add((a.better, a.worse))
    return {PreferenceAtom(i, ctx, b, w)
            for (i, ctx), edges in graphs.items() for b, w in _transitive_closure(edges)}


def entails(messages: Iterable[Message], audience: Iterable[int], atom: PreferenceAtom) -> bool:
    """Does a chain of messages, each sent to a superset of ``audience``, yield ``atom``?"""
    audience = frozenset(audience)
    edges = {(m.atom.better, m.atom.worse) for m in messages
             if audience <= m.arc and m.atom.player == atom.player and m.atom.context == atom.context}
    seen = {atom.better}
    stack = [atom.better]
    while stack:
        cur = stack.pop()
        for b, w in edges:
            if b == cur and w not in seen:
                if w == atom.worse:
                    return True
                seen.add(w)
                stack.append(w)
    return False


def _entailed_table(skeleton: Skeleton, messages: frozenset[Message],
                    audience: frozenset[int]) -> PreferenceTable:
    return PreferenceTable.from_atoms(skeleton, entailed_atoms(messages, audience))


def _apply(table: PreferenceTable, arc: Iterable[int], restriction: Restriction,
           notion: Notion) -> Restriction:
    skel = table.skeleton
    masks = list(restriction.masks)
    for i in arc:
        cur = restriction.masks[i]
        alternatives = cur if notion is Notion.LOCAL else (1 << restriction.sizes[i]) - 1
        ctxmask = skel.context_mask(i, restriction.masks)
        keep = cur
        s = 0
        bits = cur
        while bits:
            if bits & 1 and table.dominated(i, s, alternatives, ctxmask):
                keep &= ~(1 << s)
            bits >>= 1
            s += 1
        masks[i] = keep
    return Restriction(restriction.sizes, tuple(masks))


def _fixpoint(table: PreferenceTable, arc: Iterable[int], notion: Notion,
              start: Restriction, observer: Callable[[Restriction], None] | None = None) -> Restriction:
    arc = sorted(arc)
    cur = start
    while True:
        if observer is not None:
            observer(cur)
        nxt = _apply(table, arc, cur, notion)
        if nxt == cur:
            return cur
        cur = nxt


def apply_T(arc: Iterable[int], restriction: Restriction, notion: Notion | str, game: Game) -> Restriction:
    """One simultaneous elimination step for the members of ``arc``."""
    if restriction.sizes != game.sizes:
        raise GameError("restriction does not belong to this game")
    return _apply(game.table, sorted(arc), restriction, Notion(notion))


def iterate_to_fixpoint(arc: Iterable[int], notion: Notion | str, game: Game,
                        observer: Callable[[Restriction], None] | None = None) -> Restriction:
    """Iterate :func:`apply_T` from the full restriction until nothing changes.

    ``observer`` is called with every restriction of the sequence, the final
    fixpoint included.
    """
    return _fixpoint(game.table, arc, Notion(notion), game.full(), observer)


def outcome_complete(hypergraph: Hypergraph, notion: Notion | str, game: Game) -> Restriction:
    """Outcome after all communication permitted by ``hypergraph`` has happened.

    A player contained in no arc intersects over nothing, i.e. starts from the
    full restriction, and still eliminates privately.
    """
    notion = Notion(notion)
    table = game.table
    full = game.full()
    fix = {arc: _fixpoint(table, arc, notion, full) for arc in hypergraph.arcs}
    masks = []
    for i in range(game.n):
        inter = full
        for arc in hypergraph.containing(i):
            inter = inter & fix[arc]
        masks.append(_apply(table, (i,), inter, notion).masks[i])
    return Restriction(game.sizes, tuple(masks))


def _intermediate_table(game: Game, arc: frozenset[int], messages: frozenset[Message]) -> PreferenceTable:
    if len(arc) == 1:
        return game.table
    return _entailed_table(game.skeleton, messages, arc)


def apply_T_intermediate(arc: Iterable[int], messages: Iterable[Message], restriction: Restriction,
                         notion: Notion | str, game: Game) -> Restriction:
    """Elimination on ``arc`` using only the information its members share.

    A singleton arc uses the player's own preferences; a larger arc uses the
    atoms entailed by the messages sent to supersets of it.
    """
    arc = frozenset(arc)
    if not arc:
        raise GameError("arc must be non-empty")
    if restriction.sizes != game.sizes:
        raise GameError("restriction does not belong to this game")
    table = _intermediate_table(game, arc, frozenset(messages))
    return _apply(table, sorted(arc), restriction, Notion(notion))


def iterate_intermediate(arc: Iterable[int], messages: Iterable[Message], notion: Notion | str,
                         game: Game, observer: Callable[[Restriction], None] | None = None) -> Restriction:
    arc = frozenset(arc)
    table = _intermediate_table(game, arc, frozenset(messages))
    return _fixpoint(table, arc, Notion(notion), game.full(), observer)


class IntermediateSolver:
    """Computes outcomes for many message sets over one game and hypergraph.

    Fixpoints are memoized on the part of the message set visible to each arc,
    so sweeping over many message sets shares work. Results are identical to
    :func:`outcome_intermediate`.
    """

    def __init__(self, game: Game, hypergraph: Hypergraph, notion: Notion | str = Notion.GLOBAL):
        self.game = game
        self.hypergraph = hypergraph
        self.notion = Notion(notion)
        self.closed = closure_intersections(hypergraph)
        self._fix: dict[tuple[frozenset[int], frozenset], Restriction] = {}
        self._full = game.full()
        self._private: dict[tuple[int, tuple[int, ...]], int] = {}
        self._containing = [self.closed.containing(i) for i in range(game.n)]

    def _arc_fixpoint(self, arc: frozenset[int], messages: frozenset[Message]) -> Restriction:
        if len(arc) == 1:
            key = (arc, frozenset())
        else:
            key = (arc, frozenset((m.atom.player, m.atom.context, m.atom.better, m.atom.worse)
                                  for m in messages if arc <= m.arc))
        hit = self._fix.get(key)
        if hit is None:
            table = _intermediate_table(self.game, arc, messages)
            hit = self._fix[key] = _fixpoint(table, arc, self.notion, self._full)
        return hit

    def outcome(self, messages: Iterable[Message]) -> Restriction:
        messages = frozenset(messages)
        game = self.game
        fix = {arc: self._arc_fixpoint(arc, messages).masks for arc in self.closed.arcs}
        masks = []
        for i in range(game.n):
            inter = list(self._full.masks)
            for arc in self._containing[i]:
                for j, m in enumerate(fix[arc]):
                    inter[j] &= m
            key = (i, tuple(inter))
            hit = self._private.get(key)
            if hit is None:
                r = Restriction(game.sizes, key[1])
                hit = self._private[key] = _apply(game.table, (i,), r, self.notion).masks[i]
            masks.append(hit)
        return Restriction(game.sizes, tuple(masks))


def outcome_intermediate(hypergraph: Hypergraph, messages: Iterable[Message],
                         notion: Notion | str, game: Game) -> Restriction:
    """Outcome in the intermediate state given by ``messages``.

    Per player: intersect the fixpoints over all arcs of the intersection
    closure that contain the player, apply one private elimination step, keep
    the player's own component.
    """
    return IntermediateSolver(game, hypergraph, notion).outcome(messages)


def is_nonempty(restriction: Restriction) -> bool:
    return all(restriction.masks)


def lg_agreement_violations(game: Game, sequence: Sequence[Restriction],
                            table: PreferenceTable | None = None) -> list[tuple[int, int]]:
    """Rounds and players where local and global kept-sets differ along ``sequence``.

    ``table`` defaults to the game's own preferences.
    """
    bad = []
    table = game.table if table is None else table
    for k, r in enumerate(sequence):
        loc = _apply(table, range(game.n), r, Notion.LOCAL)
        glo = _apply(table, range(game.n), r, Notion.GLOBAL)
        for i in range(game.n):
            if loc.masks[i] != glo.masks[i]:
                bad.append((k, i))
    return bad
