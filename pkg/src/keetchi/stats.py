"""Statistics ledger collected from a simulation run, and its CSV output."""
from __future__ import annotations

import csv
import os
from collections import Counter
from dataclasses import dataclass, field

from .engine import StatKind

SUMMARY_FILE = "summary.csv"
EVENTS_FILE = "events.csv"
DELIVERIES_FILE = "deliveries.csv"


@dataclass(frozen=True)
class DeliveryRecord:
    name: object
    origin: int
    consumer: int
    publish_t: float
    deliver_t: float
    interested: bool


@dataclass
class StatsLedger:
    events: list = field(default_factory=list)        # (time, node, StatEvent)
    deliveries: list = field(default_factory=list)    # DeliveryRecord
    publications: list = field(default_factory=list)  # (name, origin, time)
    interest_pairs: set = field(default_factory=set)  # (name, consumer)
    occupancy_samples: list = field(default_factory=list)
    link: Counter = field(default_factory=Counter)
    final: dict = field(default_factory=dict)         # node -> Snapshot
    metrics: dict = field(default_factory=dict)

    def counters(self) -> dict:
        """Per-node counts of each stat kind."""
        out = {}
        for _, node, ev in self.events:
            out.setdefault(node, Counter())[ev.kind] += 1
        return out

    def total(self, kind: StatKind) -> int:
        return sum(1 for _, _, ev in self.events if ev.kind is kind)

    def select(self, kind: StatKind = None, node=None, name=None, peer=None):
        return [(t, n, ev) for t, n, ev in self.events
                if (kind is None or ev.kind is kind)
                and (node is None or n == node)
                and (name is None or ev.name == name)
                and (peer is None or ev.peer == peer)]


def compute_metrics(ledger: StatsLedger) -> dict:
    """Derived metrics; a pure function of the ledger's raw records."""
    kinds = Counter(ev.kind for _, _, ev in ledger.events)
    delivered = {(d.name, d.consumer): d for d in ledger.deliveries}
    hit = [delivered[p] for p in ledger.interest_pairs if p in delivered]
    new, dup = kinds[StatKind.DATA_RECV_NEW], kinds[StatKind.DATA_RECV_DUP]

    def mean(xs):
        return sum(xs) / len(xs) if xs else 0.0

    return {
        "items_published": float(len(ledger.publications)),
        "interested_delivery_ratio": (len(hit) / len(ledger.interest_pairs)
                                      if ledger.interest_pairs else 0.0),
        "mean_delivery_delay": mean([d.deliver_t - d.publish_t for d in ledger.deliveries]),
        "mean_interested_delivery_delay": mean([d.deliver_t - d.publish_t for d in hit]),
        "app_deliveries": float(kinds[StatKind.APP_DELIVERY]),
        "data_sent": float(kinds[StatKind.DATA_SENT]),
        "feedback_sent": float(kinds[StatKind.FEEDBACK_SENT]),
        "duplicate_ratio": dup / (new + dup) if new + dup else 0.0,
        "mean_cache_occupancy": mean(ledger.occupancy_samples),
        "eviction_count": float(kinds[StatKind.CACHE_EVICTION]),
        "link_lost": float(ledger.link["lost"]),
        "link_unicast_dropped": float(ledger.link["unicast_dropped"]),
    }


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_stats(ledger: StatsLedger, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    metrics = ledger.metrics or compute_metrics(ledger)
    kind_order = {k: i for i, k in enumerate(StatKind)}
    try:
        path = os.path.join(out_dir, SUMMARY_FILE)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["metric", "value"])
            for key, value in metrics.items():
                w.writerow([key, _fmt(float(value))])

        path = os.path.join(out_dir, EVENTS_FILE)
        rows = sorted(ledger.events, key=lambda r: (r[0], r[1], kind_order[r[2].kind]))
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["time_s", "node", "kind", "name", "peer"])
            for t, node, ev in rows:
                w.writerow([_fmt(float(t)), node, ev.kind.name, _fmt(ev.name), _fmt(ev.peer)])

        path = os.path.join(out_dir, DELIVERIES_FILE)
        rows = sorted(ledger.deliveries, key=lambda d: (d.deliver_t, d.consumer, str(d.name)))
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["name", "origin", "consumer", "publish_t", "deliver_t", "interested"])
            for d in rows:
                w.writerow([d.name, d.origin, d.consumer, _fmt(float(d.publish_t)),
                            _fmt(float(d.deliver_t)), int(d.interested)])
    except OSError as exc:
        raise OSError(f"cannot write statistics to {path}: {exc}") from exc
