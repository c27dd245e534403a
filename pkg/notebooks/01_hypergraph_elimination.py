"""
Elimination under an interaction structure
==========================================

Who talks to whom changes which strategies can be ruled out. This script
solves one three-player game under two hypergraphs.
"""
from pathlib import Path

from iesds import io
from iesds.elimination import Hypergraph, closure_intersections, iterate_to_fixpoint, outcome_complete

DATA = Path(__file__).resolve().parent.parent / "data"
game = io.parse_game(io.load_json(DATA / "pairwise" / "game.json"))
print(game)

# %% Everyone in one room: the customary fixpoint
everyone = Hypergraph(game.n, [range(game.n)])
print("one arc       ", outcome_complete(everyone, "global", game).names(game))
print("customary     ", iterate_to_fixpoint(range(game.n), "global", game).names(game))

# %% Only pairwise conversations
pairwise = io.parse_hypergraph(io.load_json(DATA / "pairwise" / "hypergraph.json"), game)
print("pairwise arcs ", [sorted(a) for a in pairwise.arcs])
print("closure       ", [sorted(a) for a in closure_intersections(pairwise).arcs])
print("pairwise      ", outcome_complete(pairwise, "global", game).names(game))

# %% Each arc's own fixpoint; a player keeps only what survives on all its arcs
for arc in closure_intersections(pairwise).arcs:
    print(sorted(arc), iterate_to_fixpoint(arc, "local", game).names(game))
