"""The per-node Keetchi layer.

An :class:`Engine` lives for the whole lifetime of a node. Every entry point
takes the current time as an argument (the engine never reads a clock) and
returns a :class:`KAction` describing what the caller has to send where.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .errors import ClockSkew, InvalidParam, MalformedMessage
from .learning import LearningParams, apply_reward
from .model import (BROADCAST, DataMessage, DataName, FeedbackMessage, LayerSource,
                    NodeId, Valence, matches_prefix, next_msg_id)
from .store import Contact, DataStore, InterestRecord, StoreParams


class StatKind(enum.Enum):
    DATA_SENT = 0
    DATA_RECV_NEW = 1
    DATA_RECV_DUP = 2
    FEEDBACK_SENT = 3
    FEEDBACK_RECV = 4
    CACHE_EVICTION = 5
    APP_DELIVERY = 6
    CONTACT_NEW = 7


@dataclass(frozen=True)
class StatEvent:
    kind: StatKind
    at: float
    name: Optional[DataName] = None
    peer: Optional[NodeId] = None


@dataclass(frozen=True)
class Emission:
    to_layer: LayerSource
    msg: Union[DataMessage, FeedbackMessage]
    link_dest: Optional[NodeId] = None

    def __post_init__(self):
        if (self.to_layer is LayerSource.LINK) != (self.link_dest is not None):
            raise ValueError("link_dest must be set exactly for LINK emissions")


@dataclass
class KAction:
    emissions: list = field(default_factory=list)
    stat_events: list = field(default_factory=list)

    def __bool__(self):
        return bool(self.emissions or self.stat_events)


@dataclass(frozen=True)
class EngineParams:
    k_targeted: int = 8
    k_explore: int = 4
    feedback_hop_limit: int = 2

    def __post_init__(self):
        for name in ("k_targeted", "k_explore"):
            if getattr(self, name) < 0:
                raise InvalidParam(f"{name} must be >= 0", name)
        if self.feedback_hop_limit < 1:
            raise InvalidParam("feedback_hop_limit must be >= 1", "feedback_hop_limit")


@dataclass(frozen=True)
class NodeParams:
    learning: LearningParams = LearningParams()
    store: StoreParams = StoreParams()
    engine: EngineParams = EngineParams()


@dataclass(frozen=True)
class Snapshot:
    cache: tuple      # ((name, goodness), ...) sorted by name
    neighbors: tuple  # NeighborRecord copies sorted by node id
    q_table: tuple    # ((name, QEntry copy), ...) sorted by name

    def cache_names(self):
        return [n for n, _ in self.cache]


class Engine:
    """Caching, learning and dissemination state of one node."""

    def __init__(self, self_id: NodeId, params: NodeParams = None):
        params = params or NodeParams()
        if not isinstance(params, NodeParams):
            raise InvalidParam(f"expected NodeParams, got {type(params).__name__}")
        self.self_id = self_id
        self.params = params
        self.q_table = {}
        self.store = DataStore(params.store, params.learning, self.q_table)
        self.seen_feedback_ids = set()
        self.delivered = set()
        self.msg_counter = 0
        self._stats = []
        self._last_now = None

    # -- helpers ----------------------------------------------------------

    def _advance(self, now: float):
        if self._last_now is not None and now < self._last_now:
            raise ClockSkew(f"node {self.self_id}: time went back from {self._last_now} to {now}")
        self._last_now = now

    def _fresh_id(self) -> str:
        mid = next_msg_id(self.self_id, self.msg_counter)
        self.msg_counter += 1
        return mid

    def _stat(self, action: KAction, kind: StatKind, now, name=None, peer=None):
        ev = StatEvent(kind, now, name, peer)
        action.stat_events.append(ev)
        self._stats.append(ev)

    def _record_evictions(self, action, evicted, now):
        for name in evicted:
            self._stat(action, StatKind.CACHE_EVICTION, now, name)

    # -- incoming message processing --------------------------------------

    def process_data_msg(self, source: LayerSource, msg: DataMessage, now: float,
                         sender: NodeId = None) -> KAction:
        """Handle a Data message from the local applications or from a peer.

        ``sender`` is the link-layer neighbour the message came from; it only
        feeds statistics.
        """
        if not isinstance(msg, DataMessage):
            raise MalformedMessage(f"expected DataMessage, got {type(msg).__name__}")
        msg.validate()
        self._advance(now)
        action = KAction()

        if source is LayerSource.APP:
            msg = replace(msg, msg_id=self._fresh_id(), origin=self.self_id,
                          created_at=now, hop_count=0)
            self.delivered.add(msg.name)
            self._record_evictions(action, self.store.cache_put(msg, now), now)
            action.emissions.append(Emission(LayerSource.LINK, replace(msg, hop_count=1),
                                             BROADCAST))
            self._stat(action, StatKind.DATA_SENT, now, msg.name)
            return action

        if msg.is_expired(now):
            return action
        if msg.name in self.store.cache or msg.name in self.delivered:
            self._stat(action, StatKind.DATA_RECV_DUP, now, msg.name, sender)
            return action

        self.delivered.add(msg.name)
        self._stat(action, StatKind.DATA_RECV_NEW, now, msg.name, sender)
        action.emissions.append(Emission(LayerSource.APP, msg))
        self._stat(action, StatKind.APP_DELIVERY, now, msg.name, sender)
        self._record_evictions(action, self.store.cache_put(msg, now), now)
        return action

    def _reinforce(self, target: DataName, reward: float, now: float):
        alpha = self.params.learning.alpha
        touched = set()
        for name in self.store.cache:
            if matches_prefix(target, name):
                apply_reward(self.store.q_entry(name), reward, now, alpha)
                touched.add(name)
        if target not in touched:
            apply_reward(self.store.q_entry(target), reward, now, alpha)

    def process_feedback_msg(self, source: LayerSource, msg: FeedbackMessage,
                             now: float, sender: NodeId = None) -> KAction:
        if not isinstance(msg, FeedbackMessage):
            raise MalformedMessage(f"expected FeedbackMessage, got {type(msg).__name__}")
        msg.validate()
        self._advance(now)
        action = KAction()

        if source is LayerSource.APP:
            msg = replace(msg, msg_id=self._fresh_id(), origin=self.self_id,
                          created_at=now, hop_count=0,
                          hop_limit=self.params.engine.feedback_hop_limit)
            self.seen_feedback_ids.add(msg.msg_id)
            self._reinforce(msg.target, msg.reward, now)
            self._stat(action, StatKind.FEEDBACK_RECV, now, msg.target)
            action.emissions.append(Emission(LayerSource.LINK, msg, BROADCAST))
            self._stat(action, StatKind.FEEDBACK_SENT, now, msg.target)
            return action

        if msg.msg_id in self.seen_feedback_ids:
            return action
        self.seen_feedback_ids.add(msg.msg_id)
        self._reinforce(msg.target, msg.reward, now)
        self._stat(action, StatKind.FEEDBACK_RECV, now, msg.target, sender)
        if msg.origin != self.self_id:
            ttl = self.params.store.interest_ttl
            self.store.register_interest(
                InterestRecord(msg.origin, msg.target, msg.valence, now, now + ttl))
        if msg.hop_count + 1 < msg.hop_limit:
            action.emissions.append(Emission(
                LayerSource.LINK, replace(msg, hop_count=msg.hop_count + 1), BROADCAST))
            self._stat(action, StatKind.FEEDBACK_SENT, now, msg.target)
        return action

    # -- opportunistic message generation ---------------------------------

    def _send(self, action, entry, neighbor, now):
        entry.last_sent[neighbor] = now
        out = replace(entry.msg, hop_count=entry.msg.hop_count + 1)
        action.emissions.append(Emission(LayerSource.LINK, out, neighbor))
        self._stat(action, StatKind.DATA_SENT, now, entry.name, neighbor)

    def process_neighbor_list(self, neighbors, now: float) -> KAction:
        """Offer cached data to each neighbour currently in range.

        Per neighbour, items it has asked for (positive interest) go first, up to
        ``k_targeted``; then up to ``k_explore`` of the best remaining items. Items
        the neighbour has rejected (negative interest) are never offered to it.
        """
        if self.self_id in neighbors:
            raise InvalidParam(f"node {self.self_id} listed as its own neighbour")
        self._advance(now)
        action = KAction()
        store = self.store
        store.expire_state(now)
        if not neighbors:
            return action

        ranked = store.ranked(now)
        eng = self.params.engine
        g_min = self.params.learning.g_min
        # interest lookups depend only on the item, not on the neighbour
        interest = {e.name: dict(store.interested_neighbors(e.name, now)) for e, _ in ranked}

        for n in neighbors:
            if store.touch_neighbor(n, now) is not Contact.ONGOING:
                self._stat(action, StatKind.CONTACT_NEW, now, peer=n)
            sent = 0
            for entry, _ in ranked:
                if sent >= eng.k_targeted:
                    break
                if (interest[entry.name].get(n) is Valence.POSITIVE
                        and not store.sent_recently(entry, n, now)):
                    self._send(action, entry, n, now)
                    sent += 1
            sent = 0
            for entry, g in ranked:
                if sent >= eng.k_explore:
                    break
                if (g >= g_min and not store.sent_recently(entry, n, now)
                        and interest[entry.name].get(n) is not Valence.NEGATIVE):
                    self._send(action, entry, n, now)
                    sent += 1
        return action

    # -- status information -----------------------------------------------

    def status_snapshot(self, now: float) -> Snapshot:
        store = self.store
        cache = tuple(sorted(((name, store.goodness(e, now)) for name, e in store.cache.items()),
                             key=lambda p: str(p[0])))
        neighbors = tuple(replace(r) for _, r in sorted(store.neighbors.items()))
        q_table = tuple((n, q.copy()) for n, q in sorted(self.q_table.items(),
                                                         key=lambda p: str(p[0])))
        return Snapshot(cache, neighbors, q_table)

    def q_value(self, name: DataName) -> Optional[float]:
        entry = self.q_table.get(name)
        return None if entry is None else entry.q

    # -- statistics -------------------------------------------------------

    def drain_stats(self) -> list:
        out, self._stats = self._stats, []
        return out


def engine_init(self_id: NodeId, params: NodeParams = None) -> Engine:
    return Engine(self_id, params)
