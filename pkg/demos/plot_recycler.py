"""
Re-offering cached data in a new neighbourhood
==============================================

A chain 1-4-3-2 carries a notice about a full recycling bin from node 1.
Node 3 cares about ``/uni/recycler`` and answers with positive feedback.
At t=100 node 2 leaves the chain and joins nodes 5 and 6, which never met
the publisher, and hands them the notice from its own cache.
"""
from pathlib import Path

from keetchi import StatKind, load_config, run_scenario

here = Path(__file__).parent
ledger = run_scenario(load_config(here / "scenarios" / "recycler.json"))

for rec in ledger.deliveries:
    print(f"node {rec.consumer} got {rec.name} at t={rec.deliver_t:.2f} "
          f"(delay {rec.deliver_t - rec.publish_t:.2f} s, interested={rec.interested})")

###############################################################################
# Where the feedback went.
for t, node, ev in ledger.select(StatKind.FEEDBACK_SENT):
    print(f"t={t:.2f} node {node} forwarded feedback on {ev.name}")

###############################################################################
# Q values for the item, per node. Nodes reached by the feedback moved up.
item = ledger.deliveries[0].name
for node, snap in sorted(ledger.final.items()):
    q = dict(snap.q_table).get(item)
    print(node, "-" if q is None else f"{q.q:+.3f}")
