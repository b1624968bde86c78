"""
Random waypoint sweep
=====================

Thirty walkers on a 500 m square; five publish events people want, five
publish ads people reject. We vary the exploratory fan-out and see how much
traffic buys how much delivery. Several seeds per setting run in parallel
processes.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from keetchi import load_config, run_scenario

here = Path(__file__).parent
base = load_config(here / "scenarios" / "campus.json")


def one(args):
    k, seed = args
    cfg = replace(base, seed=seed, engine=replace(base.engine, k_explore=k))
    m = run_scenario(cfg).metrics
    return k, m["interested_delivery_ratio"], m["data_sent"], m["mean_interested_delivery_delay"]


if __name__ == "__main__":
    jobs = [(k, s) for k in (0, 1, 4) for s in range(3)]
    with ProcessPoolExecutor() as pool:
        rows = list(pool.map(one, jobs))

    print(" k  ratio   data_sent  delay")
    for k in (0, 1, 4):
        r = np.array([row[1:] for row in rows if row[0] == k])
        print(f"{k:2d}  {r[:, 0].mean():.3f}  {r[:, 1].mean():9.0f}  {r[:, 2].mean():6.1f}")
