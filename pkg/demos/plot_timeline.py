"""
Carrying data to a node that asked earlier
==========================================

Four nodes, contacts replayed from a trace. E (node 4) meets B (node 2)
first and tells it that it likes ``/news``. Later A (node 1) publishes an
item while B is nearby, and B carries it back to E on their next meeting.
"""
from pathlib import Path

from keetchi import StatKind, load_config, run_scenario

here = Path(__file__).parent
cfg = load_config(here / "scenarios" / "timeline.json")
ledger = run_scenario(cfg)

names = {1: "A", 2: "B", 3: "C", 4: "E"}

# the complete event log, one line per engine statistic
for t, node, ev in ledger.events:
    peer = "" if ev.peer is None else f" <-> {names.get(ev.peer, ev.peer)}"
    what = "" if ev.name is None else f" {ev.name}"
    print(f"{t:8.2f}  {names[node]}  {ev.kind.name:<14}{what}{peer}")

###############################################################################
# E's cache at the end of the run, and what it thinks of ``/news``.
snap = ledger.final[4]
print("E holds:", [str(n) for n in snap.cache_names()])
for name, q in snap.q_table:
    print(f"  Q({name}) = {q.q:+.3f}  (+{q.n_pos} / -{q.n_neg})")
