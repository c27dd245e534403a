"""Strategic games with parametrized preferences, restrictions and strict dominance.

A game is identified with its set of preference atoms: an atom
``(i, s_{-i}, better, worse)`` states that player ``i`` strictly prefers
``better`` over ``worse`` when the opponents play the context ``s_{-i}``.
Strategies are stored as dense per-player indices; labels and strategy names
are kept on the :class:`Game` for input and output.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence


class GameError(ValueError):
    """Malformed game, restriction or name lookup."""


class Notion(enum.Enum):
    """Optimality notion: local (``sd^l``) or global (``sd^g``) strict dominance."""

    LOCAL = "local"
    GLOBAL = "global"


@dataclass(frozen=True, order=True)
class PreferenceAtom:
    """``better`` is strictly preferred to ``worse`` by ``player`` in ``context``.

    ``context`` lists one strategy index per opponent, in player order with
    ``player`` itself skipped.
    """

    player: int
    context: tuple[int, ...]
    better: int
    worse: int


class Violation(NamedTuple):
    kind: str  # "irreflexivity" | "asymmetry" | "transitivity" | "range"
    player: int
    context: tuple[int, ...]
    strategies: tuple[int, ...]


class Game:
    """Finite strategic game given by per-context strict preference atoms.

    The constructor only checks that atoms are in range; use
    :func:`validate_game` for the strict-partial-order requirement.
    """

    __slots__ = ("labels", "strategies", "atoms", "__dict__")

    def __init__(self, labels: Sequence[str], strategies: Sequence[Sequence[str]],
                 atoms: Iterable[PreferenceAtom]):
        labels = tuple(str(x) for x in labels)
        strategies = tuple(tuple(str(s) for s in ss) for ss in strategies)
        if len(labels) < 2:
            raise GameError("a game needs at least two players")
        if len(set(labels)) != len(labels):
            raise GameError(f"duplicate player labels: {labels}")
        if len(strategies) != len(labels):
            raise GameError("one strategy list per player is required")
        for label, ss in zip(labels, strategies):
            if not ss:
                raise GameError(f"player {label} has no strategies")
            if len(set(ss)) != len(ss):
                raise GameError(f"player {label} has duplicate strategy names")
        self.labels = labels
        self.strategies = strategies
        atoms = frozenset(atoms)
        for a in atoms:
            self._check_atom(a)
        self.atoms = atoms

    def _check_atom(self, a: PreferenceAtom) -> None:
        n = len(self.labels)
        if not 0 <= a.player < n:
            raise GameError(f"atom player out of range: {a}")
        sizes = self.sizes
        others = [j for j in range(n) if j != a.player]
        if len(a.context) != len(others) or any(
                not 0 <= s < sizes[j] for j, s in zip(others, a.context)):
            raise GameError(f"atom context out of range: {a}")
        if not (0 <= a.better < sizes[a.player] and 0 <= a.worse < sizes[a.player]):
            raise GameError(f"atom strategy out of range: {a}")

    def __repr__(self) -> str:
        return f"Game(labels={self.labels!r}, strategies={self.strategies!r}, atoms={len(self.atoms)})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Game):
            return NotImplemented
        return (self.labels, self.strategies, self.atoms) == (other.labels, other.strategies, other.atoms)

    @cached_property
    def _hash(self) -> int:
        return hash((self.labels, self.strategies, self.atoms))

    def __hash__(self) -> int:
        return self._hash

    @property
    def n(self) -> int:
        return len(self.labels)

    @cached_property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(ss) for ss in self.strategies)

    @cached_property
    def skeleton(self) -> Skeleton:
        return Skeleton(self.sizes)

    def full(self) -> Restriction:
        return Restriction.full(self.sizes)

    def player_index(self, label: str | int) -> int:
        if isinstance(label, int):
            if 0 <= label < self.n:
                return label
            raise GameError(f"player index out of range: {label}")
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise GameError(f"unknown player: {label!r}") from None

    def strategy_index(self, player: int, name: str | int) -> int:
        if isinstance(name, int):
            if 0 <= name < self.sizes[player]:
                return name
            raise GameError(f"strategy index out of range: {name}")
        try:
            return self.strategies[player].index(str(name))
        except ValueError:
            raise GameError(
                f"unknown strategy {name!r} for player {self.labels[player]}") from None

    def atom(self, player: str | int, context: Mapping[str, str] | Sequence[str],
             better: str, worse: str) -> PreferenceAtom:
        """Build an atom from labels and strategy names.

        ``context`` is either a mapping opponent label -> strategy name or a
        sequence of strategy names in opponent order.
        """
        i = self.player_index(player)
        others = [j for j in range(self.n) if j != i]
        if isinstance(context, Mapping):
            if set(map(str, context)) != {self.labels[j] for j in others}:
                raise GameError(f"context must name every opponent of {self.labels[i]}")
            ctx = tuple(self.strategy_index(j, context[self.labels[j]]) for j in others)
        else:
            if len(context) != len(others):
                raise GameError("context length does not match the number of opponents")
            ctx = tuple(self.strategy_index(j, s) for j, s in zip(others, context))
        return PreferenceAtom(i, ctx, self.strategy_index(i, better), self.strategy_index(i, worse))

    def describe(self, a: PreferenceAtom) -> str:
        ctx = ",".join(self.strategies[j][s] for j, s in zip(self.skeleton.opponents(a.player), a.context))
        ss = self.strategies[a.player]
        return f"{ss[a.better]} >_{self.labels[a.player]}({ctx}) {ss[a.worse]}"

    @cached_property
    def table(self) -> PreferenceTable:
        return PreferenceTable.from_atoms(self.skeleton, self.atoms)

    def atoms_of(self, player: int) -> frozenset[PreferenceAtom]:
        return frozenset(a for a in self.atoms if a.player == player)

    def sorted_atoms(self) -> list[PreferenceAtom]:
        return sorted(self.atoms)


class Skeleton:
    """Strategy-set sizes of a game, with context indexing helpers.

    Contexts of player ``i`` are the opponent profiles, enumerated in
    lexicographic order of opponent strategy indices.
    """

    __slots__ = ("sizes", "_contexts", "_ctx_index", "_with")

    _cache: dict[tuple[int, ...], Skeleton] = {}

    def __new__(cls, sizes: Sequence[int]):
        sizes = tuple(int(s) for s in sizes)
        hit = cls._cache.get(sizes)
        if hit is not None:
            return hit
        if len(sizes) < 2 or min(sizes) < 1:
            raise GameError(f"invalid strategy-set sizes: {sizes}")
        self = super().__new__(cls)
        self.sizes = sizes
        n = len(sizes)
        self._contexts = []
        self._ctx_index = []
        self._with = []
        for i in range(n):
            others = [j for j in range(n) if j != i]
            ctxs = list(itertools.product(*(range(sizes[j]) for j in others)))
            self._contexts.append(ctxs)
            self._ctx_index.append({c: k for k, c in enumerate(ctxs)})
            # _with[i][j][s] = bitmask of i's contexts in which opponent j plays s
            masks: dict[int, list[int]] = {}
            for pos, j in enumerate(others):
                row = [0] * sizes[j]
                for k, c in enumerate(ctxs):
                    row[c[pos]] |= 1 << k
                masks[j] = row
            self._with.append(masks)
        cls._cache[sizes] = self
        return self

    def __reduce__(self):
        return (Skeleton, (self.sizes,))

    def __repr__(self) -> str:
        return f"Skeleton({self.sizes})"

    @property
    def n(self) -> int:
        return len(self.sizes)

    def opponents(self, i: int) -> list[int]:
        return [j for j in range(self.n) if j != i]

    def contexts(self, i: int) -> list[tuple[int, ...]]:
        return self._contexts[i]

    def context_index(self, i: int, ctx: tuple[int, ...]) -> int:
        return self._ctx_index[i][ctx]

    def context_mask(self, i: int, masks: Sequence[int]) -> int:
        """Bitmask of player ``i``'s contexts lying inside the restriction ``masks``."""
        out = (1 << len(self._contexts[i])) - 1
        for j, row in self._with[i].items():
            m = 0
            bits = masks[j]
            s = 0
            while bits:
                if bits & 1:
                    m |= row[s]
                bits >>= 1
                s += 1
            out &= m
        return out

    def all_atoms(self) -> list[PreferenceAtom]:
        """Every syntactically possible atom, in canonical order."""
        out = []
        for i, k in enumerate(self.sizes):
            for ctx in self._contexts[i]:
                for b in range(k):
                    for w in range(k):
                        if b != w:
                            out.append(PreferenceAtom(i, ctx, b, w))
        return out

    def dom_cap(self) -> int:
        return sum(self.sizes)


class PreferenceTable:
    """``masks[i][b][w]``: bitmask of contexts in which ``b`` beats ``w`` for player ``i``."""

    __slots__ = ("skeleton", "masks")

    def __init__(self, skeleton: Skeleton, masks):
        self.skeleton = skeleton
        self.masks = masks

    @classmethod
    def empty(cls, skeleton: Skeleton) -> PreferenceTable:
        return cls(skeleton, [[[0] * k for _ in range(k)] for k in skeleton.sizes])

    @classmethod
    def from_atoms(cls, skeleton: Skeleton, atoms: Iterable[PreferenceAtom]) -> PreferenceTable:
        t = cls.empty(skeleton)
        for a in atoms:
            t.masks[a.player][a.better][a.worse] |= 1 << skeleton.context_index(a.player, a.context)
        return t

    def dominated(self, i: int, s: int, alternatives: int, ctxmask: int) -> bool:
        """Is ``s`` beaten in every context of ``ctxmask`` by one of ``alternatives``?"""
        row = self.masks[i]
        b = 0
        while alternatives:
            if alternatives & 1 and b != s and row[b][s] & ctxmask == ctxmask:
                return True
            alternatives >>= 1
            b += 1
        return False


def _mask(indices: Iterable[int]) -> int:
    m = 0
    for s in indices:
        m |= 1 << s
    return m


@dataclass(frozen=True)
class Restriction:
    """Per-player subsets of strategies, stored as bitmasks over strategy indices."""

    sizes: tuple[int, ...]
    masks: tuple[int, ...]

    @classmethod
    def full(cls, sizes: Sequence[int]) -> Restriction:
        sizes = tuple(sizes)
        return cls(sizes, tuple((1 << k) - 1 for k in sizes))

    @classmethod
    def from_sets(cls, sizes: Sequence[int], sets: Sequence[Iterable[int]]) -> Restriction:
        sizes = tuple(sizes)
        masks = tuple(_mask(s) for s in sets)
        for k, m in zip(sizes, masks):
            if m >> k:
                raise GameError("restriction component outside the strategy set")
        return cls(sizes, masks)

    @classmethod
    def from_names(cls, game: Game, comps: Mapping[str, Iterable[str]]) -> Restriction:
        sets: list[Iterable[int]] = [range(k) for k in game.sizes]
        for label, names in comps.items():
            i = game.player_index(label)
            sets[i] = [game.strategy_index(i, s) for s in names]
        return cls.from_sets(game.sizes, sets)

    def component(self, i: int) -> tuple[int, ...]:
        m = self.masks[i]
        return tuple(s for s in range(self.sizes[i]) if m >> s & 1)

    def components(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self.component(i) for i in range(len(self.sizes)))

    def contains(self, i: int, s: int) -> bool:
        return bool(self.masks[i] >> s & 1)

    def names(self, game: Game) -> dict[str, list[str]]:
        return {game.labels[i]: [game.strategies[i][s] for s in self.component(i)]
                for i in range(game.n)}

    def replace(self, i: int, mask: int) -> Restriction:
        masks = list(self.masks)
        masks[i] = mask
        return Restriction(self.sizes, tuple(masks))

    def _check(self, other: Restriction) -> None:
        if self.sizes != other.sizes:
            raise GameError("restrictions belong to different games")

    def __and__(self, other: Restriction) -> Restriction:
        self._check(other)
        return Restriction(self.sizes, tuple(a & b for a, b in zip(self.masks, other.masks)))

    def __le__(self, other: Restriction) -> bool:
        self._check(other)
        return all(a & ~b == 0 for a, b in zip(self.masks, other.masks))

    def __lt__(self, other: Restriction) -> bool:
        return self <= other and self != other

    def __ge__(self, other: Restriction) -> bool:
        return other <= self

    def __gt__(self, other: Restriction) -> bool:
        return other < self

    def count(self) -> int:
        return sum(bin(m).count("1") for m in self.masks)


def restriction_intersect(r1: Restriction, r2: Restriction) -> Restriction:
    return r1 & r2


def restriction_subset(r1: Restriction, r2: Restriction) -> bool:
    return r1 <= r2


def game_from_payoffs(labels: Sequence[str], strategies: Sequence[Sequence[str]],
                      payoffs: Mapping[tuple[str, ...], Sequence[float]]) -> Game:
    """Preference atoms induced by numeric utilities; ties give no atom.

    ``payoffs`` maps every strategy profile (a tuple of strategy names in
    player order) to one utility per player.
    """
    labels = tuple(labels)
    strategies = tuple(tuple(s) for s in strategies)
    n = len(labels)
    util: dict[tuple[int, ...], Sequence[float]] = {}
    index = [{s: k for k, s in enumerate(ss)} for ss in strategies]
    for profile, us in payoffs.items():
        if len(profile) != n:
            raise GameError(f"profile {profile} does not list one strategy per player")
        try:
            key = tuple(index[i][s] for i, s in enumerate(profile))
        except KeyError as e:
            raise GameError(f"unknown strategy {e.args[0]!r} in profile {profile}") from None
        if len(us) != n:
            raise GameError(f"profile {profile} needs {n} utilities, got {len(us)}")
        util[key] = us
    missing = [p for p in itertools.product(*(range(len(ss)) for ss in strategies)) if p not in util]
    if missing:
        names = ",".join(strategies[i][s] for i, s in enumerate(missing[0]))
        raise GameError(f"payoff table is missing {len(missing)} profile(s), e.g. ({names})")
    atoms = []
    sizes = [len(ss) for ss in strategies]
    for profile, us in util.items():
        for i in range(n):
            for alt in range(sizes[i]):
                if alt == profile[i]:
                    continue
                other = profile[:i] + (alt,) + profile[i + 1:]
                if util[other][i] > us[i]:
                    atoms.append(PreferenceAtom(i, profile[:i] + profile[i + 1:], alt, profile[i]))
    return Game(labels, strategies, atoms)


def validate_game(game: Game) -> list[Violation]:
    """All strict-partial-order violations, per player and context. Empty means valid."""
    by_ctx: dict[tuple[int, tuple[int, ...]], set[tuple[int, int]]] = {}
    for a in game.atoms:
        by_ctx.setdefault((a.player, a.context), set()).add((a.better, a.worse))
    out: list[Violation] = []
    for (i, ctx), rel in sorted(by_ctx.items()):
        for b, w in sorted(rel):
            if b == w:
                out.append(Violation("irreflexivity", i, ctx, (b,)))
            elif (w, b) in rel and b < w:
                out.append(Violation("asymmetry", i, ctx, (b, w)))
        for a, b in sorted(rel):
            for b2, c in sorted(rel):
                if b == b2 and a != b and b != c and a != c and (a, c) not in rel:
                    out.append(Violation("transitivity", i, ctx, (a, b, c)))
    return out


def sd_holds(table: PreferenceTable, notion: Notion, i: int, s: int, restriction: Restriction) -> bool:
    """Index-level dominance test against an arbitrary preference table."""
    alternatives = restriction.masks[i] if notion is Notion.LOCAL else (1 << restriction.sizes[i]) - 1
    ctxmask = table.skeleton.context_mask(i, restriction.masks)
    return not table.dominated(i, s, alternatives, ctxmask)


def sd_check(notion: Notion | str, player: str | int, strategy: str | int,
             restriction: Restriction, game: Game) -> bool:
    """True iff ``strategy`` is not strictly dominated on ``restriction``.

    Alternatives range over the restricted set for :attr:`Notion.LOCAL` and over
    the initial strategy set for :attr:`Notion.GLOBAL`. An empty opponent
    product makes every distinct alternative dominate vacuously.
    """
    notion = Notion(notion)
    if restriction.sizes != game.sizes:
        raise GameError("restriction does not belong to this game")
    i = game.player_index(player)
    s = game.strategy_index(i, strategy)
    return sd_holds(game.table, notion, i, s, restriction)
