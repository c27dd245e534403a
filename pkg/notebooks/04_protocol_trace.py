"""
A round-based conversation
==========================

Players announce preferences one at a time, deliberate after every message,
and record what they conclude. The trace is what the CLI writes as JSONL.
"""
from pathlib import Path

from iesds import io
from iesds.simulator import Conclude, Picture, Scripted, Seeded, run, verify_run

DATA = Path(__file__).resolve().parent.parent / "data"
bundle = DATA / "pairwise"
game = io.parse_game(io.load_json(bundle / "game.json"))
h = io.parse_hypergraph(io.load_json(bundle / "hypergraph.json"), game)
script = io.parse_messages(io.load_json(bundle / "script.json"), game, h)

result = run(game, h, Scripted(tuple(script)))
for e in result.trace:
    if isinstance(e, Conclude):
        print(f"round {e.round:2} player {game.labels[e.player]} via {[game.labels[k] for k in e.chain]}:"
              f" {game.strategies[e.target][e.strategy]} is dominated")
    elif isinstance(e, Picture):
        print(f"         picture of {game.labels[e.player]}: {e.restriction.names(game)}")

# %% Let a seeded schedule finish the conversation
full = run(game, h, Seeded(7))
print("final own components:", [p.names(game)[game.labels[i]] for i, p in enumerate(full.final_pictures)])
print(verify_run(full, game, h).passed)
print(io.dumps_trace(full.trace, game).splitlines()[0])
