"""Positive epistemic formulas (atoms, conjunction, disjunction, common knowledge).

Formulas are hash-consed: structurally equal formulas are the same object, so
the exponentially large ``dom`` family is stored as a DAG and evaluators can
memoize on node identity.
"""
from __future__ import annotations

import weakref
from functools import lru_cache
from typing import Iterable

from .game import PreferenceAtom, Skeleton


class CapExceeded(RuntimeError):
    """A configured size cap would be exceeded; ``estimate`` is the projected size."""

    def __init__(self, what: str, estimate: int, cap: int):
        super().__init__(f"{what}: estimated {estimate} exceeds cap {cap}")
        self.what = what
        self.estimate = estimate
        self.cap = cap


class Formula:
    __slots__ = ("kind", "children", "atom", "group", "__weakref__")

    kind: str  # "atom" | "and" | "or" | "ck"
    children: tuple[Formula, ...]
    atom: PreferenceAtom | None
    group: frozenset[int] | None

    def __repr__(self) -> str:
        if self.tree_size() > 64:
            # written out, shared formulas can be exponentially long
            return f"<{self.kind} formula, {len(self.nodes())} shared nodes>"
        return self._render()

    def _render(self) -> str:
        if self.kind == "atom":
            a = self.atom
            return f"p{a.player}{list(a.context)}({a.better}>{a.worse})"
        if self.kind == "ck":
            g = sorted(self.group)
            op = f"K{g[0]}" if len(g) == 1 else f"C{g}"
            return f"{op}({self.children[0]._render()})"
        if not self.children:
            return "true" if self.kind == "and" else "false"
        sep = " & " if self.kind == "and" else " | "
        return "(" + sep.join(c._render() for c in self.children) + ")"

    def is_knowledge(self) -> bool:
        return self.kind == "ck" and len(self.group) == 1

    def nodes(self) -> list[Formula]:
        """Distinct sub-formulas in post-order."""
        seen: set[int] = set()
        out: list[Formula] = []
        stack: list[tuple[Formula, bool]] = [(self, False)]
        while stack:
            f, expanded = stack.pop()
            if expanded:
                out.append(f)
                continue
            if id(f) in seen:
                continue
            seen.add(id(f))
            stack.append((f, True))
            for c in reversed(f.children):
                if id(c) not in seen:
                    stack.append((c, False))
        return out

    def tree_size(self) -> int:
        """Size of the formula written out without sharing."""
        memo: dict[int, int] = {}
        for f in self.nodes():
            memo[id(f)] = 1 + sum(memo[id(c)] for c in f.children)
        return memo[id(self)]


_table: weakref.WeakValueDictionary = weakref.WeakValueDictionary()


def _make(kind: str, children: tuple[Formula, ...] = (), atom: PreferenceAtom | None = None,
          group: frozenset[int] | None = None) -> Formula:
    key = (kind, tuple(id(c) for c in children), atom, group)
    hit = _table.get(key)
    if hit is not None and hit.children == children:
        return hit
    f = object.__new__(Formula)
    f.kind = kind
    f.children = children
    f.atom = atom
    f.group = group
    _table[key] = f
    return f


def Atom(p: PreferenceAtom) -> Formula:
    return _make("atom", atom=p)


def And(*fs: Formula) -> Formula:
    """Conjunction; ``And()`` is true."""
    if len(fs) == 1:
        return fs[0]
    return _make("and", tuple(fs))


def Or(*fs: Formula) -> Formula:
    """Disjunction; ``Or()`` is false."""
    if len(fs) == 1:
        return fs[0]
    return _make("or", tuple(fs))


def CK(group: Iterable[int], f: Formula) -> Formula:
    group = frozenset(group)
    if not group:
        raise ValueError("common knowledge needs a non-empty group")
    return _make("ck", (f,), group=group)


def K(i: int, f: Formula) -> Formula:
    return CK((i,), f)


def K_chain(w: Iterable[int], f: Formula) -> Formula:
    """``K_{w1} K_{w2} ... f``."""
    for i in reversed(list(w)):
        f = K(i, f)
    return f


TRUE = And()
FALSE = Or()

DEFAULT_NODE_CAP = 500_000


class _Builder:
    def __init__(self, skeleton: Skeleton, node_cap: int):
        self.skeleton = skeleton
        self.node_cap = node_cap
        self.domin: dict[tuple[int, int, int], Formula] = {}
        self.dom: dict[tuple[int, int, int], Formula] = {}

    def _body(self, level: int, i: int, s: int, epistemic: bool) -> Formula:
        sk = self.skeleton
        disj = []
        for alt in range(sk.sizes[i]):
            conj = []
            for ctx in sk.contexts(i):
                p = Atom(PreferenceAtom(i, ctx, alt, s))
                if level == 1:
                    conj.append(p)
                else:
                    prev = [self.get(level - 1, j, sj, epistemic) for j, sj in zip(sk.opponents(i), ctx)]
                    conj.append(Or(p, *prev))
            disj.append(And(*conj))
        return Or(*disj)

    def get(self, level: int, i: int, s: int, epistemic: bool) -> Formula:
        estimate = node_estimate(self.skeleton, level)
        if estimate > self.node_cap:
            raise CapExceeded("formula nodes", estimate, self.node_cap)
        memo = self.dom if epistemic else self.domin
        key = (level, i, s)
        hit = memo.get(key)
        if hit is None:
            for lv in range(1, level):
                # build bottom-up to keep the recursion shallow
                for j in range(self.skeleton.n):
                    for sj in range(self.skeleton.sizes[j]):
                        if (lv, j, sj) not in memo:
                            self._store(memo, lv, j, sj, epistemic)
            hit = self._store(memo, level, i, s, epistemic)
        return hit

    def _store(self, memo, level, i, s, epistemic) -> Formula:
        body = self._body(level, i, s, epistemic)
        f = K(i, body) if epistemic else body
        memo[(level, i, s)] = f
        return f


def node_estimate(skeleton: Skeleton, level: int) -> int:
    """Upper bound on shared DAG nodes for all ``dom`` formulas up to ``level``."""
    per_level = sum(k * (k * len(skeleton.contexts(i)) * 2 + 2) for i, k in enumerate(skeleton.sizes))
    return level * per_level


@lru_cache(maxsize=64)
def _builder(skeleton: Skeleton, node_cap: int) -> _Builder:
    return _Builder(skeleton, node_cap)


def build_domin(level: int, player: int, strategy: int, skeleton: Skeleton,
                node_cap: int = DEFAULT_NODE_CAP) -> Formula:
    """Non-epistemic formula: ``strategy`` is eliminated within ``level`` rounds."""
    if level < 1:
        raise ValueError("level must be at least 1")
    return _builder(skeleton, node_cap).get(level, player, strategy, False)


def build_dom(level: int, player: int, strategy: int, skeleton: Skeleton,
              node_cap: int = DEFAULT_NODE_CAP) -> Formula:
    """Epistemic formula: ``player`` knows ``strategy`` is eliminated within ``level`` rounds."""
    if level < 1:
        raise ValueError("level must be at least 1")
    return _builder(skeleton, node_cap).get(level, player, strategy, True)


def dom_cap(skeleton: Skeleton) -> int:
    """Level at which the ``dom`` family is taken as stabilized: total number of strategies."""
    return skeleton.dom_cap()
