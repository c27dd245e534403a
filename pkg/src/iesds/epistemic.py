"""Brute-force model checker for positive epistemic formulas over states ``(V, M)``.

The universe of states is the set of all valuations (a strict partial order
per player and context) paired with every truthful message set whose arcs are
hyperarcs. It factors into independent cells, one per (player, context): a
cell option fixes the local order and the messages sent about it. A state is
one option per cell, indexed in mixed radix, so formula extensions are boolean
numpy vectors over the whole universe.

Player ``k`` cannot tell two states apart when they agree on ``k``'s own atoms
and on every message whose arc contains ``k``. Common knowledge among a group
is evaluated on connected components of the union of the members' relations.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .elimination import Hypergraph, Message, entails
from .formula import CapExceeded, Formula, build_dom, build_domin, dom_cap
from .game import Game, GameError, PreferenceAtom, Restriction, Skeleton

DEFAULT_ATOM_CAP = 8
DEFAULT_STATE_CAP = 1_000_000


@dataclass(frozen=True)
class Caps:
    atoms: int = DEFAULT_ATOM_CAP
    states: int = DEFAULT_STATE_CAP

    def __post_init__(self):
        if self.atoms < 1 or self.states < 1:
            raise ValueError("caps must be positive")


@dataclass(frozen=True)
class EpistemicState:
    valuation: frozenset[PreferenceAtom]
    messages: frozenset[Message]


def strict_partial_orders(k: int) -> list[frozenset[tuple[int, int]]]:
    """Every strict partial order on ``range(k)`` as a set of (better, worse) pairs."""
    pairs = [(a, b) for a in range(k) for b in range(k) if a != b]
    out = []
    for bits in range(1 << len(pairs)):
        rel = {p for n, p in enumerate(pairs) if bits >> n & 1}
        if any((b, a) in rel for a, b in rel):
            continue
        if any((a, c) not in rel for a, b in rel for b2, c in rel if b == b2 and a != c):
            continue
        out.append(frozenset(rel))
    return sorted(out, key=lambda r: (len(r), sorted(r)))


def _subsets(items: list) -> Iterator[frozenset]:
    for r in range(len(items) + 1):
        for combo in itertools.combinations(items, r):
            yield frozenset(combo)


def estimate_universe(skeleton: Skeleton, hypergraph: Hypergraph) -> int:
    total = 1
    for i, k in enumerate(skeleton.sizes):
        arcs = len(hypergraph.containing(i))
        per_cell = sum(2 ** (len(rel) * arcs) for rel in strict_partial_orders(k))
        total *= per_cell ** len(skeleton.contexts(i))
    return total


def atom_count(skeleton: Skeleton) -> int:
    return sum(k * (k - 1) * len(skeleton.contexts(i)) for i, k in enumerate(skeleton.sizes))


class StateUniverse:
    """All epistemic states over a strategy skeleton and hypergraph.

    Raises :class:`CapExceeded` when the atom alphabet or the number of states
    would exceed ``caps``.
    """

    def __init__(self, skeleton: Skeleton, hypergraph: Hypergraph, caps: Caps = Caps()):
        if hypergraph.n != skeleton.n:
            raise GameError("hypergraph and game have different numbers of players")
        n_atoms = atom_count(skeleton)
        if n_atoms > caps.atoms:
            raise CapExceeded("atoms", n_atoms, caps.atoms)
        size = estimate_universe(skeleton, hypergraph)
        if size > caps.states:
            raise CapExceeded("states", size, caps.states)
        self.skeleton = skeleton
        self.hypergraph = hypergraph
        self.caps = caps
        self.size = size

        # cells: (player, context) of players with at least two strategies
        self.cells: list[tuple[int, tuple[int, ...]]] = []
        self.options: list[list[tuple[frozenset, frozenset]]] = []
        self._option_index: list[dict] = []
        for i, k in enumerate(skeleton.sizes):
            if k < 2:
                continue
            arcs = hypergraph.containing(i)
            sporders = strict_partial_orders(k)
            for ctx in skeleton.contexts(i):
                opts = []
                for rel in sporders:
                    candidates = [(arc, b, w) for (b, w) in sorted(rel) for arc in arcs]
                    for msgs in _subsets(candidates):
                        opts.append((rel, msgs))
                self.cells.append((i, ctx))
                self.options.append(opts)
                self._option_index.append({o: n for n, o in enumerate(opts)})
        self.radix = [len(o) for o in self.options]
        assert math.prod(self.radix) == size
        self.strides = []
        acc = 1
        for r in reversed(self.radix):
            self.strides.append(acc)
            acc *= r
        self.strides.reverse()
        self._cell_of = {c: n for n, c in enumerate(self.cells)}
        self._ext: dict[int, tuple[Formula, np.ndarray]] = {}
        self._components: dict[frozenset[int], np.ndarray] = {}

    def __len__(self) -> int:
        return self.size

    # -- state encoding ---------------------------------------------------

    @cached_property
    def digits(self) -> list[np.ndarray]:
        idx = np.arange(self.size, dtype=np.int64)
        return [((idx // st) % r).astype(np.int32) for st, r in zip(self.strides, self.radix)]

    def index_of(self, state: EpistemicState) -> int:
        rel: dict[int, set] = {c: set() for c in range(len(self.cells))}
        msgs: dict[int, set] = {c: set() for c in range(len(self.cells))}
        for a in state.valuation:
            c = self._cell_of.get((a.player, a.context))
            if c is None:
                raise GameError(f"atom {a} is outside this universe")
            rel[c].add((a.better, a.worse))
        for m in state.messages:
            a = m.atom
            c = self._cell_of.get((a.player, a.context))
            if c is None or m.sender != a.player:
                raise GameError(f"message {m} is outside this universe")
            msgs[c].add((m.arc, a.better, a.worse))
        out = 0
        for c in range(len(self.cells)):
            key = (frozenset(rel[c]), frozenset(msgs[c]))
            n = self._option_index[c].get(key)
            if n is None:
                raise GameError("state is not in this universe (invalid valuation or message)")
            out += n * self.strides[c]
        return out

    @cached_property
    def _decoded(self) -> list[list[tuple[tuple[PreferenceAtom, ...], tuple[Message, ...]]]]:
        out = []
        for (i, ctx), opts in zip(self.cells, self.options):
            row = []
            for rel, msgs in opts:
                atoms = tuple(PreferenceAtom(i, ctx, b, w) for b, w in sorted(rel))
                sent = tuple(Message(i, arc, PreferenceAtom(i, ctx, b, w)) for arc, b, w in msgs)
                row.append((atoms, sent))
            out.append(row)
        return out

    def state(self, index: int) -> EpistemicState:
        index = int(index)
        if not 0 <= index < self.size:
            raise IndexError(index)
        valuation: list[PreferenceAtom] = []
        messages: list[Message] = []
        for row, st, r in zip(self._decoded, self.strides, self.radix):
            atoms, sent = row[(index // st) % r]
            valuation.extend(atoms)
            messages.extend(sent)
        return EpistemicState(frozenset(valuation), frozenset(messages))

    def states(self) -> Iterator[EpistemicState]:
        for n in range(self.size):
            yield self.state(n)

    def indices_with_valuation(self, valuation: Iterable[PreferenceAtom]) -> np.ndarray:
        """Indices of all states whose valuation is exactly ``valuation``."""
        rel: dict[int, set] = {c: set() for c in range(len(self.cells))}
        for a in valuation:
            c = self._cell_of.get((a.player, a.context))
            if c is None:
                raise GameError(f"atom {a} is outside this universe")
            rel[c].add((a.better, a.worse))
        out = np.zeros(1, dtype=np.int64)
        for c in range(len(self.cells)):
            target = frozenset(rel[c])
            opts = np.array([n for n, (r, _) in enumerate(self.options[c]) if r == target], dtype=np.int64)
            if not len(opts):
                raise GameError("valuation is not a strict partial order")
            out = (out[:, None] + opts[None, :] * self.strides[c]).ravel()
        return np.sort(out)

    # -- indistinguishability ----------------------------------------------

    @cached_property
    def classes(self) -> list[np.ndarray]:
        """Per player, the indistinguishability class id of every state."""
        out = []
        for k in range(self.skeleton.n):
            key = np.zeros(self.size, dtype=np.int64)
            mult = 1
            for c, (i, _) in enumerate(self.cells):
                if i == k:
                    obs = np.arange(self.radix[c], dtype=np.int64)
                else:
                    seen: dict[frozenset, int] = {}
                    obs = np.array([seen.setdefault(frozenset(m for m in msgs if k in m[0]), len(seen))
                                    for _, msgs in self.options[c]], dtype=np.int64)
                width = int(obs.max()) + 1
                if width > 1:
                    key += obs[self.digits[c]] * mult
                    mult *= width
            _, inv = np.unique(key, return_inverse=True)
            out.append(inv.astype(np.int64).ravel())
        return out

    def indistinguishable(self, s1: EpistemicState, s2: EpistemicState, i: int) -> bool:
        """Same own atoms for ``i`` and the same messages on arcs containing ``i``."""
        return (_own(s1, i), _seen(s1, i)) == (_own(s2, i), _seen(s2, i))

    def components(self, group: Iterable[int]) -> np.ndarray:
        """Component label of every state under the closure of the members' relations."""
        group = frozenset(group)
        hit = self._components.get(group)
        if hit is not None:
            return hit
        members = sorted(group)
        if len(members) == 1:
            comp = self.classes[members[0]]
        else:
            rows, cols = [], []
            offset = self.size
            idx = np.arange(self.size, dtype=np.int64)
            for k in members:
                cl = self.classes[k]
                rows.append(idx)
                cols.append(cl + offset)
                offset += int(cl.max()) + 1
            rows = np.concatenate(rows)
            cols = np.concatenate(cols)
            graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(offset, offset))
            _, labels = connected_components(graph, directed=False)
            comp = labels[: self.size].astype(np.int64)
        self._components[group] = comp
        return comp

    def reachable(self, state: EpistemicState, group: Iterable[int]) -> list[EpistemicState]:
        comp = self.components(group)
        label = comp[self.index_of(state)]
        return [self.state(int(n)) for n in np.flatnonzero(comp == label)]

    # -- evaluation ------------------------------------------------------

    def _atom_ext(self, a: PreferenceAtom) -> np.ndarray:
        c = self._cell_of.get((a.player, a.context))
        if c is None:
            # a single-strategy player has no atoms; irreflexive atoms are never true
            return np.zeros(self.size, dtype=bool)
        table = np.array([(a.better, a.worse) in rel for rel, _ in self.options[c]], dtype=bool)
        return table[self.digits[c]]

    def _ck_ext(self, group: frozenset[int], inner: np.ndarray) -> np.ndarray:
        comp = self.components(group)
        bad = np.bincount(comp, weights=~inner)
        return (bad == 0)[comp]

    def extension(self, f: Formula) -> np.ndarray:
        """Boolean vector: does ``f`` hold at each state?"""
        hit = self._ext.get(id(f))
        if hit is not None and hit[0] is f:
            return hit[1]
        # atoms and knowledge nodes are memoized; connectives are recomputed
        stack = [(f, False)]
        local: dict[int, np.ndarray] = {}
        while stack:
            g, ready = stack.pop()
            if id(g) in local:
                continue
            memo = self._ext.get(id(g))
            if memo is not None and memo[0] is g:
                local[id(g)] = memo[1]
                continue
            if g.kind == "atom":
                val = self._atom_ext(g.atom)
                self._ext[id(g)] = (g, val)
                local[id(g)] = val
                continue
            if not ready:
                stack.append((g, True))
                stack.extend((c, False) for c in g.children if id(c) not in local)
                continue
            kids = [local[id(c)] for c in g.children]
            if g.kind == "and":
                val = np.ones(self.size, dtype=bool)
                for x in kids:
                    val &= x
            elif g.kind == "or":
                val = np.zeros(self.size, dtype=bool)
                for x in kids:
                    val |= x
            else:
                val = self._ck_ext(g.group, kids[0])
                self._ext[id(g)] = (g, val)
            local[id(g)] = val
        return local[id(f)]

    def models(self, state: EpistemicState | int, f: Formula) -> bool:
        index = state if isinstance(state, (int, np.integer)) else self.index_of(state)
        return bool(self.extension(f)[index])

    def forget(self) -> None:
        """Drop memoized extensions (component labels are kept)."""
        self._ext.clear()

    # -- entailment, vectorized per cell ----------------------------------

    def entailment_ext(self, group: Iterable[int], a: PreferenceAtom) -> np.ndarray:
        """Per state: is ``a`` entailed by the messages received by ``group``?"""
        group = frozenset(group)
        c = self._cell_of.get((a.player, a.context))
        if c is None:
            return np.zeros(self.size, dtype=bool)
        i, ctx = self.cells[c]
        table = np.array([entails([Message(i, arc, PreferenceAtom(i, ctx, b, w)) for arc, b, w in msgs], group, a)
                          for _, msgs in self.options[c]], dtype=bool)
        return table[self.digits[c]]

    def product_view(self, ext: np.ndarray) -> np.ndarray:
        """``ext`` reshaped with one axis per cell (axis order = ``cells``)."""
        return ext.reshape(self.radix) if self.radix else ext.reshape(())


def _own(state: EpistemicState, i: int) -> frozenset:
    return frozenset(a for a in state.valuation if a.player == i)


def _seen(state: EpistemicState, i: int) -> frozenset:
    return frozenset(m for m in state.messages if i in m.arc)


def enumerate_states(skeleton: Skeleton, hypergraph: Hypergraph, caps: Caps = Caps()) -> StateUniverse:
    return StateUniverse(skeleton, hypergraph, caps)


def indistinguishable(s1: EpistemicState, s2: EpistemicState, i: int) -> bool:
    return (_own(s1, i), _seen(s1, i)) == (_own(s2, i), _seen(s2, i))


def reachable(state: EpistemicState, group: Iterable[int], universe: StateUniverse) -> list[EpistemicState]:
    """States related to ``state`` by the transitive closure of the members' relations."""
    return universe.reachable(state, group)


def models(state: EpistemicState, f: Formula, universe: StateUniverse) -> bool:
    return universe.models(state, f)


def game_state(game: Game, messages: Iterable[Message]) -> EpistemicState:
    """The state induced by ``game`` after ``messages`` were sent."""
    return EpistemicState(game.atoms, frozenset(messages))


def epistemic_outcome(game: Game, hypergraph: Hypergraph, messages: Iterable[Message],
                      caps: Caps = Caps(), universe: StateUniverse | None = None) -> Restriction:
    """Per player, the strategies whose ``dom^inf`` formula is false at the game's state."""
    if universe is None:
        universe = StateUniverse(game.skeleton, hypergraph, caps)
    index = universe.index_of(game_state(game, messages))
    return dominated_view(universe, index, game.skeleton)


def dominated_view(universe: StateUniverse, index: int, skeleton: Skeleton) -> Restriction:
    level = dom_cap(skeleton)
    sets = []
    for i, k in enumerate(skeleton.sizes):
        sets.append([s for s in range(k) if not universe.extension(build_dom(level, i, s, skeleton))[index]])
    return Restriction.from_sets(skeleton.sizes, sets)


def domin_survivors(game: Game, level: int, universe: StateUniverse | None = None) -> Restriction:
    """Strategies whose ``domin^level`` formula is false under the game's valuation."""
    sk = game.skeleton
    sets = []
    for i, k in enumerate(sk.sizes):
        keep = []
        for s in range(k):
            f = build_domin(level, i, s, sk)
            if universe is None:
                holds = evaluate_plain(f, game.atoms)
            else:
                holds = universe.models(game_state(game, ()), f)
            if not holds:
                keep.append(s)
        sets.append(keep)
    return Restriction.from_sets(sk.sizes, sets)


def evaluate_plain(f: Formula, valuation: frozenset[PreferenceAtom]) -> bool:
    """Evaluate a knowledge-free formula directly against a valuation."""
    memo: dict[int, bool] = {}
    for g in f.nodes():
        if g.kind == "atom":
            memo[id(g)] = g.atom in valuation
        elif g.kind == "and":
            memo[id(g)] = all(memo[id(c)] for c in g.children)
        elif g.kind == "or":
            memo[id(g)] = any(memo[id(c)] for c in g.children)
        else:
            raise ValueError("evaluate_plain does not handle knowledge operators")
    return memo[id(f)]

