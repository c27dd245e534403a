"""Per-player algorithmic knowledge from own preferences and observed messages.

A player keeps the messages it observed and their deductive closure: two
statements about the same player and context that chain by transitivity give
a derived statement, attributed to the intersection of the two audiences.
:func:`evaluate` decides nested-knowledge formulas from that local view alone.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .elimination import Hypergraph, Message
from .formula import Formula, build_dom, dom_cap
from .game import GameError, PreferenceAtom, Restriction, Skeleton


class UnsupportedQuery(ValueError):
    """The formula uses common knowledge of a group larger than one player."""


def _saturate(closed: set[Message], frontier: set[Message]) -> None:
    # semi-naive: only pairs involving a new message are composed each round
    while frontier:
        new = set()
        for m in frontier:
            for o in closed:
                for first, second in ((m, o), (o, m)):
                    a1, a2 = first.atom, second.atom
                    if (a1.player == a2.player and a1.context == a2.context
                            and a1.worse == a2.better and a1.better != a2.worse):
                        derived = Message(a1.player, first.arc & second.arc,
                                          PreferenceAtom(a1.player, a1.context, a1.better, a2.worse))
                        if derived not in closed:
                            new.add(derived)
        closed |= new
        frontier = new


def closure_observed(observed: Iterable[Message]) -> frozenset[Message]:
    """Least superset closed under chaining ``b > c`` with ``c > d`` into ``b > d``.

    The derived statement is attributed to the intersection of both audiences.
    """
    closed = set(observed)
    _saturate(closed, set(closed))
    return frozenset(closed)


def _extend_closure(closed: frozenset[Message], msg: Message) -> frozenset[Message]:
    if msg in closed:
        return closed
    out = set(closed)
    out.add(msg)
    _saturate(out, {msg})
    return frozenset(out)


@dataclass(frozen=True, eq=False)
class PlayerLocalState:
    """What one player knows: its own atoms and the messages it observed."""

    player: int
    own_atoms: frozenset[PreferenceAtom]
    hypergraph: Hypergraph
    observed: frozenset[Message] = frozenset()
    closure: frozenset[Message] = field(default=None)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if any(a.player != self.player for a in self.own_atoms):
            raise GameError("own_atoms may only hold the player's own preferences")
        for m in self.observed:
            if self.player not in m.arc:
                raise GameError(f"player {self.player} cannot observe a message sent to {sorted(m.arc)}")
        if self.closure is None:
            object.__setattr__(self, "closure", closure_observed(self.observed))
        arcs: dict[PreferenceAtom, list[frozenset[int]]] = {}
        for m in self.closure:
            arcs.setdefault(m.atom, []).append(m.arc)
        object.__setattr__(self, "_arcs", arcs)

    @classmethod
    def initial(cls, game, player: int, hypergraph: Hypergraph) -> PlayerLocalState:
        return cls(player, game.atoms_of(player), hypergraph)

    def observe(self, msg: Message) -> PlayerLocalState:
        """New local state with ``msg`` observed; duplicates are idempotent."""
        if self.player not in msg.arc:
            raise GameError(f"player {self.player} cannot observe a message sent to {sorted(msg.arc)}")
        if msg in self.observed:
            return self
        return PlayerLocalState(self.player, self.own_atoms, self.hypergraph,
                                self.observed | {msg}, _extend_closure(self.closure, msg))

    def _message_supports(self, p: PreferenceAtom, group: frozenset[int]) -> bool:
        return any(group <= arc for arc in self._arcs.get(p, ()))

    def evaluate(self, formula: Formula, w: Sequence[int] = ()) -> bool:
        """Algorithm-1 style evaluation of ``K_w formula`` from this player's view.

        The result depends on ``w`` only through its set of players, which is
        the memo key together with the formula node.
        """
        return self._eval(frozenset(w), formula)

    def _eval(self, ws: frozenset[int], f: Formula) -> bool:
        key = (ws, id(f))
        hit = self._cache.get(key)
        if hit is not None and hit[0] is f:
            return hit[1]
        i = self.player
        if f.kind == "atom":
            p = f.atom
            if ws <= {i} and p.player == i:
                val = p in self.own_atoms
            else:
                val = self._message_supports(p, ws)
        elif f.kind == "and":
            val = all(self._eval(ws, c) for c in f.children)
        elif f.kind == "or":
            val = any(self._eval(ws, c) for c in f.children)
        else:
            if len(f.group) != 1:
                raise UnsupportedQuery("only single-player knowledge operators are supported")
            (j,) = f.group
            grown = ws | {j}
            if grown == {i} or self.hypergraph.covers(grown):
                val = self._eval(grown, f.children[0])
            else:
                val = False
        self._cache[key] = (f, val)
        return val


def observe(local: PlayerLocalState, msg: Message) -> PlayerLocalState:
    return local.observe(msg)


def evaluate(local: PlayerLocalState, w: Sequence[int], formula: Formula) -> bool:
    return local.evaluate(formula, w)


def knows(local: PlayerLocalState, formula: Formula) -> bool:
    """Does the player know ``formula``? (evaluation with ``w`` = the player)"""
    return local.evaluate(formula, (local.player,))


def known_dominated(local: PlayerLocalState, level: int, target: int, strategy: int,
                    skeleton: Skeleton) -> bool:
    """Can the player tell that ``target`` knows ``strategy`` is eliminated within ``level`` rounds?"""
    if not 1 <= level <= dom_cap(skeleton):
        raise ValueError(f"level must lie in 1..{dom_cap(skeleton)}")
    return local.evaluate(build_dom(level, target, strategy, skeleton))


def current_picture(local: PlayerLocalState, skeleton: Skeleton) -> Restriction:
    """Per player, the strategies not known (from this view) to be eliminated."""
    level = dom_cap(skeleton)
    sets = []
    for j, k in enumerate(skeleton.sizes):
        sets.append([s for s in range(k) if not known_dominated(local, level, j, s, skeleton)])
    return Restriction.from_sets(skeleton.sizes, sets)
