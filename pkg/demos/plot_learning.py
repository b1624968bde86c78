"""
How feedback moves the Q value
==============================

A single cached name, repeatedly rated. The learning rate sets how fast Q
follows the rewards, and goodness mixes it with popularity and freshness.
"""
import numpy as np

from keetchi.learning import LearningParams, QEntry, apply_reward, freshness, goodness

rng = np.random.default_rng(0)
rewards = np.where(rng.random(40) < 0.75, 1.0, -1.0)   # a mostly liked item

for alpha in (0.1, 0.5, 0.9):
    e = QEntry(q=0.0)
    trace = []
    for i, r in enumerate(rewards):
        apply_reward(e, r, float(i), alpha)
        trace.append(e.q)
    print(f"alpha={alpha}: " + " ".join(f"{q:+.2f}" for q in trace[::4]))

###############################################################################
# Freshness halves every ``tau`` seconds.
tau = 900.0
for age in (0, 450, 900, 1800, 3600):
    print(f"age {age:5d} s -> freshness {freshness(0.0, float(age), tau):.3f}")

###############################################################################
# Goodness of the learnt entry as it ages.
params = LearningParams()
for now in (0.0, 600.0, 1800.0, 3600.0):
    print(f"t={now:6.0f}  g={goodness(e, 0.0, now, params):.3f}")
