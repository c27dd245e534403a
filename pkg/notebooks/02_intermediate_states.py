"""
Outcomes while messages are still in flight
===========================================

Between silence and complete communication, the outcome depends on which
preferences have been announced and to whom.
"""
from pathlib import Path

from iesds import io
from iesds.elimination import IntermediateSolver, all_messages, entails

DATA = Path(__file__).resolve().parent.parent / "data"
bundle = DATA / "combining_step"
game = io.parse_game(io.load_json(bundle / "game.json"))
h = io.parse_hypergraph(io.load_json(bundle / "hypergraph.json"), game)
solver = IntermediateSolver(game, h)

for name in ("messages_empty.json", "messages_m1.json", "messages_m2.json"):
    msgs = io.parse_messages(io.load_json(bundle / name), game, h)
    print(f"{name:22} {len(msgs):2} messages ->", solver.outcome(msgs).names(game))

print("everything said    ->", solver.outcome(all_messages(h, game)).names(game))

# %% Entailment combines messages whose audiences overlap
bundle = DATA / "intersections"
game = io.parse_game(io.load_json(bundle / "game.json"))
msgs = io.parse_messages(io.load_json(bundle / "messages_m.json"), game)
a_over_c = game.atom("1", ("L", "X", "Y"), "A", "C")
for group in ({0, 1}, {0, 1, 2}):
    print(game.describe(a_over_c), "entailed for", sorted(group), entails(msgs, group, a_over_c))
