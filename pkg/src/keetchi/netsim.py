"""Deterministic discrete-event network simulator.

Nodes move according to a mobility model (static, random waypoint, or a
replayed contact trace). Periodic beacons hand each node's engine its current
neighbour list; link emissions become arrival events after a fixed per-hop
delay, optionally subject to independent loss.

All randomness comes from :func:`derive_streams`, one stream per concern, all
derived from the scenario seed.
"""
from __future__ import annotations

import bisect
import enum
import heapq
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .engine import StatKind
from .errors import CausalityViolation, InvalidParam, MalformedTrace, NotPositional
from .model import BROADCAST, DataMessage, LayerSource
from .stats import DeliveryRecord, StatsLedger, compute_metrics


def derive_streams(seed: int) -> dict:
    """Independent generators for mobility, link loss and application traffic."""
    mob, loss, app = np.random.SeedSequence(seed).spawn(3)
    return {"mobility": np.random.default_rng(mob),
            "loss": np.random.default_rng(loss),
            "app": np.random.default_rng(app)}


# -- events -------------------------------------------------------------------

class EventKind(enum.Enum):
    BEACON = "beacon"
    APP_TIMER = "app_timer"
    MSG_ARRIVAL = "msg_arrival"
    TRACE_CONTACT = "trace_contact"
    SIM_END = "sim_end"


@dataclass(eq=False)
class Event:
    at: float
    kind: EventKind
    node: Optional[int] = None
    msg: object = None
    sender: Optional[int] = None
    peer: Optional[int] = None
    up: Optional[bool] = None
    tag: Optional[str] = None
    seq: int = -1


class EventQueue:
    """Min-heap on ``(at, seq)``; ``seq`` is assigned in scheduling order."""

    def __init__(self):
        self._heap = []
        self._seq = 0

    def __len__(self):
        return len(self._heap)

    def push(self, event: Event) -> Event:
        event.seq = self._seq
        self._seq += 1
        heapq.heappush(self._heap, (event.at, event.seq, event))
        return event

    def pop(self) -> Event:
        return heapq.heappop(self._heap)[2]

    def peek(self) -> Optional[Event]:
        return self._heap[0][2] if self._heap else None


# -- mobility -----------------------------------------------------------------

class Trajectory:
    """Piecewise-linear path: a list of legs ``(t0, t1, p0, p1)``."""

    def __init__(self, start, t0=0.0):
        self.start = np.asarray(start, dtype=float)
        self.t_end = t0
        self.legs = []
        self._starts = []

    @property
    def end(self):
        return self.legs[-1][3] if self.legs else self.start

    def add_leg(self, dest, duration):
        dest = np.asarray(dest, dtype=float)
        t0 = self.t_end
        self.legs.append((t0, t0 + duration, self.end, dest))
        self._starts.append(t0)
        self.t_end = t0 + duration

    def add_pause(self, duration):
        self.add_leg(self.end, duration)

    def position(self, t):
        if not self.legs or t <= self.legs[0][0]:
            return self.start.copy()
        i = bisect.bisect_right(self._starts, t) - 1
        t0, t1, p0, p1 = self.legs[i]
        if t >= t1 or t1 == t0:
            return p1.copy()
        return p0 + (p1 - p0) * ((t - t0) / (t1 - t0))


class StaticMobility:
    positional = True

    def __init__(self, positions: dict):
        self.positions = {n: np.asarray(p, dtype=float) for n, p in positions.items()}

    def position(self, node, now):
        return self.positions[node].copy()


class RandomWaypoint:
    """Random waypoint in a ``width`` x ``height`` rectangle.

    Each node starts at a uniform point, then repeatedly picks a uniform
    destination and speed, travels there in a straight line, and pauses.
    Trajectories are extended lazily as later times are queried.
    """
    positional = True

    def __init__(self, nodes, width, height, speed_min, speed_max, pause, rng):
        if not (width > 0 and height > 0):
            raise InvalidParam("area must have positive width and height", "width")
        if not 0 < speed_min <= speed_max:
            raise InvalidParam("need 0 < speed_min <= speed_max", "speed_min")
        if pause < 0:
            raise InvalidParam("pause must be >= 0", "pause")
        self.width, self.height = float(width), float(height)
        self.speed = (float(speed_min), float(speed_max))
        self.pause = float(pause)
        self.paths = {}
        self._rngs = {}
        # one child generator per node keeps paths independent of query order
        children = rng.spawn(len(nodes)) if hasattr(rng, "spawn") else [rng] * len(nodes)
        for n, r in zip(sorted(nodes), children):
            self._rngs[n] = r
            self.paths[n] = Trajectory(self._point(r))

    def _point(self, rng):
        return rng.uniform((0.0, 0.0), (self.width, self.height))

    def position(self, node, now):
        path, rng = self.paths[node], self._rngs[node]
        while path.t_end <= now:
            dest = self._point(rng)
            speed = rng.uniform(*self.speed)
            path.add_leg(dest, float(np.linalg.norm(dest - path.end)) / speed)
            if self.pause > 0:
                path.add_pause(self.pause)
        return path.position(now)


class TraceContact(NamedTuple):
    time: float
    a: int
    b: int
    up: bool
    line: int = 0


def parse_contact_trace(lines) -> list:
    """Parse ``time_s,node_a,node_b,up|down`` lines; ``#`` starts a comment."""
    events = []
    open_at = {}
    last_t = -math.inf
    for lineno, raw in enumerate(lines, 1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise MalformedTrace(lineno, f"expected 4 fields, got {len(parts)}")
        try:
            t, a, b = float(parts[0]), int(parts[1]), int(parts[2])
        except ValueError as exc:
            raise MalformedTrace(lineno, str(exc)) from None
        what = parts[3].lower()
        if what not in ("up", "down"):
            raise MalformedTrace(lineno, f"event must be 'up' or 'down', got {parts[3]!r}")
        if not math.isfinite(t) or t < 0:
            raise MalformedTrace(lineno, f"bad time {parts[0]!r}")
        if t < last_t:
            raise MalformedTrace(lineno, f"time {t} is earlier than previous {last_t}")
        if a == b:
            raise MalformedTrace(lineno, "contact of a node with itself")
        last_t = t
        pair = (min(a, b), max(a, b))
        if what == "up":
            if pair in open_at:
                raise MalformedTrace(lineno, f"contact {pair} already up")
            open_at[pair] = lineno
        else:
            if pair not in open_at:
                raise MalformedTrace(lineno, f"down without prior up for {pair}")
            del open_at[pair]
        events.append(TraceContact(t, pair[0], pair[1], what == "up", lineno))
    if open_at:
        pair, lineno = min(open_at.items(), key=lambda p: p[1])
        raise MalformedTrace(lineno, f"contact {pair} never goes down")
    return events


def load_contact_trace(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return parse_contact_trace(fh)


class TraceMobility:
    """Connectivity replayed from contact events; contacts cover ``[up, down)``."""
    positional = False

    def __init__(self, contacts):
        self.contacts = list(contacts)
        self.intervals = defaultdict(list)
        opened = {}
        for c in self.contacts:
            if c.up:
                opened[(c.a, c.b)] = c.time
            else:
                up = opened.pop((c.a, c.b))
                self.intervals[c.a].append((c.b, up, c.time))
                self.intervals[c.b].append((c.a, up, c.time))
        for (a, b), up in opened.items():
            self.intervals[a].append((b, up, math.inf))
            self.intervals[b].append((a, up, math.inf))

    def nodes(self):
        return set(self.intervals)

    def neighbors(self, node, now):
        return sorted({p for p, up, down in self.intervals.get(node, ()) if up <= now < down})


# -- link ---------------------------------------------------------------------

@dataclass(frozen=True)
class LinkModel:
    radius: float = 50.0
    per_hop_delay: float = 0.01
    loss_prob: float = 0.0
    bandwidth: Optional[float] = None  # bytes per second; None ignores payload size
    beacon_interval: float = 10.0
    trigger_on_contact: bool = True

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidParam("radius must be > 0", "radius")
        if self.per_hop_delay < 0:
            raise InvalidParam("per_hop_delay must be >= 0", "per_hop_delay")
        if not 0.0 <= self.loss_prob < 1.0:
            raise InvalidParam("loss_prob must be in [0, 1)", "loss_prob")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise InvalidParam("bandwidth must be > 0", "bandwidth")
        if not self.beacon_interval > 0:
            raise InvalidParam("beacon_interval must be > 0", "beacon_interval")

    def transit_time(self, msg) -> float:
        if self.bandwidth is None or not isinstance(msg, DataMessage):
            return self.per_hop_delay
        return self.per_hop_delay + msg.payload_size / self.bandwidth


# -- simulator ----------------------------------------------------------------

class SimNode:
    def __init__(self, engine, generator=None, consumer=None):
        self.engine = engine
        self.generator = generator
        self.consumer = consumer

    @property
    def id(self):
        return self.engine.self_id


class Simulator:
    def __init__(self, link: LinkModel = None, mobility=None, seed: int = 0):
        self.link = link or LinkModel()
        self.mobility = mobility if mobility is not None else StaticMobility({})
        self.seed = seed
        streams = derive_streams(seed)
        self.rng_loss = streams["loss"]
        self.rng_app = streams["app"]
        self.nodes = {}
        self.queue = EventQueue()
        self.now = 0.0
        self.ledger = StatsLedger()
        self._started = False
        self._static_adj = None

    def add_node(self, engine, generator=None, consumer=None) -> SimNode:
        if engine.self_id in self.nodes:
            raise InvalidParam(f"duplicate node id {engine.self_id}")
        node = SimNode(engine, generator, consumer)
        self.nodes[engine.self_id] = node
        self._static_adj = None
        return node

    def schedule(self, event: Event) -> Event:
        if event.at < self.now:
            raise CausalityViolation(f"event at {event.at} scheduled at time {self.now}")
        return self.queue.push(event)

    # -- topology -----------------------------------------------------------

    def position(self, node, now):
        if not self.mobility.positional:
            raise NotPositional("trace-driven mobility has no positions")
        return self.mobility.position(node, now)

    def _disk_neighbors(self, positions, ids, i):
        d = np.hypot(*(positions - positions[i]).T)
        return [ids[j] for j in np.flatnonzero(d <= self.link.radius) if j != i]

    def current_neighbors(self, node, now) -> list:
        if not self.mobility.positional:
            return [n for n in self.mobility.neighbors(node, now) if n in self.nodes]
        ids = sorted(self.nodes)
        if isinstance(self.mobility, StaticMobility):
            if self._static_adj is None:
                pos = np.array([self.mobility.position(n, 0.0) for n in ids]).reshape(-1, 2)
                self._static_adj = {n: self._disk_neighbors(pos, ids, i)
                                    for i, n in enumerate(ids)}
            return list(self._static_adj[node])
        pos = np.array([self.mobility.position(n, now) for n in ids]).reshape(-1, 2)
        return self._disk_neighbors(pos, ids, ids.index(node))

    # -- execution ----------------------------------------------------------

    def _execute(self, node: SimNode, action, now):
        if not action:
            return
        for em in action.emissions:
            if em.to_layer is LayerSource.LINK:
                self._transmit(node.id, em, now)
            elif isinstance(em.msg, DataMessage):
                self._deliver(node, em.msg, now)

    def _deliver(self, node: SimNode, msg: DataMessage, now):
        cons = node.consumer
        self.ledger.deliveries.append(DeliveryRecord(
            msg.name, msg.origin, node.id, msg.created_at, now,
            bool(cons and cons.cfg.wants(msg.name))))
        if cons is not None:
            self._execute(node, cons.on_delivery(node.engine, msg, now, self.rng_app), now)

    def _transmit(self, src, em, now):
        neighbors = self.current_neighbors(src, now)
        if em.link_dest == BROADCAST:
            dests = neighbors
        elif em.link_dest in neighbors:
            dests = [em.link_dest]
        else:
            self.ledger.link["unicast_dropped"] += 1
            return
        delay = self.link.transit_time(em.msg)
        for d in dests:
            if self.link.loss_prob > 0 and self.rng_loss.random() < self.link.loss_prob:
                self.ledger.link["lost"] += 1
                continue
            self.schedule(Event(now + delay, EventKind.MSG_ARRIVAL, node=d,
                                msg=em.msg, sender=src))

    def _neighbor_update(self, node: SimNode, now):
        neighbors = self.current_neighbors(node.id, now)
        self._execute(node, node.engine.process_neighbor_list(neighbors, now), now)

    def _handle(self, ev: Event):
        now = ev.at
        if ev.kind is EventKind.BEACON:
            node = self.nodes[ev.node]
            self._neighbor_update(node, now)
            self.ledger.occupancy_samples.append(len(node.engine.store))
            self.schedule(Event(now + self.link.beacon_interval, EventKind.BEACON, node=ev.node))
        elif ev.kind is EventKind.MSG_ARRIVAL:
            node = self.nodes[ev.node]
            if isinstance(ev.msg, DataMessage):
                self.ledger.link["data_arrivals"] += 1
                action = node.engine.process_data_msg(LayerSource.LINK, ev.msg, now, ev.sender)
            else:
                self.ledger.link["feedback_arrivals"] += 1
                action = node.engine.process_feedback_msg(LayerSource.LINK, ev.msg, now, ev.sender)
            self._execute(node, action, now)
        elif ev.kind is EventKind.APP_TIMER:
            node = self.nodes[ev.node]
            if ev.tag == "generator":
                action, nxt = node.generator.on_timer(node.engine, now, self.rng_app)
                if action is not None:
                    for s in action.stat_events:
                        if s.kind is StatKind.DATA_SENT:
                            self.ledger.publications.append((s.name, node.id, now))
                self._execute(node, action, now)
                if nxt is not None:
                    self.schedule(Event(nxt, EventKind.APP_TIMER, node=ev.node, tag="generator"))
            else:
                for action in node.consumer.announce(node.engine, now):
                    self._execute(node, action, now)
        elif ev.kind is EventKind.TRACE_CONTACT:
            if ev.up and self.link.trigger_on_contact:
                for n in (ev.node, ev.peer):
                    if n in self.nodes:
                        self._neighbor_update(self.nodes[n], now)

    def _bootstrap(self, until):
        ids = sorted(self.nodes)
        for i, n in enumerate(ids):
            phase = self.link.beacon_interval * i / len(ids)
            self.schedule(Event(phase, EventKind.BEACON, node=n))
        for n in ids:
            node = self.nodes[n]
            if node.generator is not None:
                self.schedule(Event(max(node.generator.first_fire(), 0.0), EventKind.APP_TIMER,
                                    node=n, tag="generator"))
            if node.consumer is not None:
                for t in node.consumer.cfg.announce_at:
                    self.schedule(Event(t, EventKind.APP_TIMER, node=n, tag="announce"))
        if not self.mobility.positional:
            for c in self.mobility.contacts:
                if c.time <= until:
                    self.schedule(Event(c.time, EventKind.TRACE_CONTACT, node=c.a,
                                        peer=c.b, up=c.up))

    def run(self, until: float) -> StatsLedger:
        """Process events up to ``until`` and return the statistics ledger."""
        if not self._started:
            self._bootstrap(until)
            self._started = True
        self.schedule(Event(until, EventKind.SIM_END))
        while self.queue:
            ev = self.queue.pop()
            self.now = ev.at
            if ev.kind is EventKind.SIM_END:
                break
            self._handle(ev)
        self._finish()
        return self.ledger

    def _finish(self):
        ledger = self.ledger
        for n in sorted(self.nodes):
            ledger.events.extend((ev.at, n, ev) for ev in self.nodes[n].engine.drain_stats())
        order = {k: i for i, k in enumerate(StatKind)}
        ledger.events.sort(key=lambda r: (r[0], r[1], order[r[2].kind]))
        ledger.interest_pairs = {
            (name, n) for name, origin, _ in ledger.publications
            for n, node in self.nodes.items()
            if n != origin and node.consumer is not None and node.consumer.cfg.wants(name)}
        ledger.final = {n: node.engine.status_snapshot(self.now) for n, node in self.nodes.items()}
        ledger.metrics = compute_metrics(ledger)
