"""
The operators as knowledge
==========================

A brute-force model checker over every epistemic state of a tiny skeleton.
A strategy is eliminated exactly when its owner knows it is dominated at the
level cap, and this matches the operator outcome.
"""

from iesds.elimination import Hypergraph, IntermediateSolver
from iesds.epistemic import Caps, StateUniverse
from iesds.formula import CK, K, Atom, build_dom, dom_cap
from iesds.game import Game, PreferenceAtom, Skeleton

sk = Skeleton((2, 2, 1))
h = Hypergraph(3, [{0, 1}, {0, 2}])
u = StateUniverse(sk, h, Caps(states=2_000_000))
print(f"{len(u)} states in {len(u.cells)} cells, radix {u.radix}")

# %% Knowledge and common knowledge of a single preference
p = Atom(PreferenceAtom(0, (0, 0), 0, 1))
for f in (p, K(0, p), K(1, p), CK({0, 1}, p)):
    print(f"{f!r:40} holds at {int(u.extension(f).sum()):6d} states")

# %% Oracle vs operators for one game and every truthful message set
game = Game(["1", "2", "3"], [["a", "b"], ["x", "y"], ["z"]],
            [PreferenceAtom(0, (0, 0), 0, 1), PreferenceAtom(0, (1, 0), 0, 1),
             PreferenceAtom(1, (1, 0), 1, 0), PreferenceAtom(1, (0, 0), 0, 1)])
level = dom_cap(sk)
exts = {(i, s): u.extension(build_dom(level, i, s, sk)) for i in range(2) for s in range(2)}
solver = IntermediateSolver(game, h)
idx = u.indices_with_valuation(game.atoms)
agree = 0
for n in idx:
    op = solver.outcome(u.state(n).messages)
    agree += all(op.contains(i, s) != bool(e[n]) for (i, s), e in exts.items())
print(f"agreement on {agree}/{len(idx)} message sets")
print("message sets where each strategy is known dominated:", {k: int(e[idx].sum()) for k, e in exts.items()})
