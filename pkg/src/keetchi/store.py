"""Per-node data stores.

Holds the bounded data cache (evicting by lowest goodness), the map of every
neighbour ever met, the interest registry filled from received feedback, and
the per-item sent-log used to suppress repeated offers to the same neighbour.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .errors import Expired, InvalidParam
from .learning import LearningParams, QEntry, goodness
from .model import DataMessage, DataName, NodeId, Valence, matches_prefix


@dataclass(frozen=True)
class StoreParams:
    capacity: int = 100
    t_resend: float = 3600.0
    interest_ttl: float = 1800.0
    contact_timeout: float = 30.0

    def __post_init__(self):
        if not (isinstance(self.capacity, int) and self.capacity > 0):
            raise InvalidParam(f"capacity={self.capacity} must be a positive integer",
                               "capacity")
        for name in ("t_resend", "interest_ttl", "contact_timeout"):
            if not getattr(self, name) > 0:
                raise InvalidParam(f"{name} must be > 0", name)


@dataclass
class CacheEntry:
    msg: DataMessage
    inserted_at: float
    q_ref: QEntry
    last_sent: dict = field(default_factory=dict)

    @property
    def name(self) -> DataName:
        return self.msg.name


@dataclass
class NeighborRecord:
    node: NodeId
    first_seen: float
    last_seen: float
    currently_connected: bool = True


@dataclass(frozen=True)
class InterestRecord:
    neighbor: NodeId
    target: DataName
    valence: Valence
    registered_at: float
    expires_at: float

    def __post_init__(self):
        if not self.expires_at > self.registered_at:
            raise InvalidParam("expires_at must be after registered_at")


class Contact(enum.Enum):
    NEW_CONTACT = "new"
    ONGOING = "ongoing"
    RECONNECT = "reconnect"


class ExpiryReport(NamedTuple):
    items: int
    interests: int
    disconnected: int


def eviction_key(entry: CacheEntry, g: float):
    """Sort key under which the first entry is the next eviction victim."""
    return (g, entry.inserted_at, str(entry.name))


def offer_key(entry: CacheEntry, g: float):
    """Sort key for propagation: best goodness first, then newest, then name."""
    return (-g, -entry.msg.created_at, str(entry.name))


class DataStore:
    def __init__(self, params: StoreParams = None, learning: LearningParams = None,
                 q_table: dict = None):
        self.params = params or StoreParams()
        self.learning = learning or LearningParams()
        self.q_table = {} if q_table is None else q_table
        self.cache = {}
        self.neighbors = {}
        self.interests = {}

    def __len__(self):
        return len(self.cache)

    # -- Q table ----------------------------------------------------------

    def q_entry(self, name: DataName) -> QEntry:
        """Q entry for ``name``, created on first use.

        A new entry starts from the longest known prefix entry, so that feedback
        given on ``/news`` before any item existed carries over to ``/news/x``.
        """
        entry = self.q_table.get(name)
        if entry is None:
            for prefix in reversed(name.prefixes()[:-1]):
                parent = self.q_table.get(prefix)
                if parent is not None:
                    entry = parent.copy()
                    break
            else:
                entry = QEntry(q=self.learning.q0)
            self.q_table[name] = entry
        return entry

    def goodness(self, entry: CacheEntry, now: float) -> float:
        return goodness(entry.q_ref, entry.msg.created_at, now, self.learning)

    # -- cache ------------------------------------------------------------

    def cache_put(self, msg: DataMessage, now: float) -> list:
        """Insert ``msg``; returns the names evicted as a result.

        At capacity the lowest-goodness entry (ties: older ``inserted_at``, then
        smaller name) is evicted, unless the newcomer is strictly worse than
        every incumbent, in which case the newcomer itself is rejected and its
        own name is reported.
        """
        if msg.is_expired(now):
            raise Expired(f"{msg.name} expired at {msg.expires_at}")
        if msg.name in self.cache:
            return []
        new = CacheEntry(msg, now, self.q_entry(msg.name))
        evicted = []
        if len(self.cache) >= self.params.capacity:
            victim = min(self.cache.values(),
                         key=lambda e: eviction_key(e, self.goodness(e, now)))
            if self.goodness(new, now) < self.goodness(victim, now):
                return [msg.name]
            del self.cache[victim.name]
            evicted.append(victim.name)
        self.cache[msg.name] = new
        return evicted

    def cache_lookup(self, name: DataName) -> Optional[CacheEntry]:
        return self.cache.get(name)

    def sent_recently(self, entry: CacheEntry, neighbor: NodeId, now: float) -> bool:
        t = entry.last_sent.get(neighbor)
        return t is not None and now - t < self.params.t_resend

    def ranked(self, now: float):
        """Unexpired cache entries paired with goodness, in offer order."""
        scored = [(e, self.goodness(e, now)) for e in self.cache.values()
                  if not e.msg.is_expired(now)]
        scored.sort(key=lambda p: offer_key(*p))
        return scored

    def top_k_candidates(self, k: int, neighbor: NodeId, now: float) -> list:
        out = []
        for entry, g in self.ranked(now):
            if len(out) >= k:
                break
            if g >= self.learning.g_min and not self.sent_recently(entry, neighbor, now):
                out.append(entry)
        return out

    # -- interests --------------------------------------------------------

    def register_interest(self, rec: InterestRecord) -> None:
        key = (rec.neighbor, rec.target)
        # re-insert so dict order tracks registration order
        self.interests.pop(key, None)
        self.interests[key] = rec

    def interested_neighbors(self, name: DataName, now: float) -> list:
        """``(neighbor, valence)`` pairs for live interests matching ``name``."""
        latest = {}
        for rec in self.interests.values():
            if now >= rec.expires_at or not matches_prefix(rec.target, name):
                continue
            cur = latest.get(rec.neighbor)
            if cur is None or rec.registered_at >= cur.registered_at:
                latest[rec.neighbor] = rec
        return [(n, latest[n].valence) for n in sorted(latest)]

    # -- neighbours -------------------------------------------------------

    def touch_neighbor(self, node: NodeId, now: float) -> Contact:
        rec = self.neighbors.get(node)
        if rec is None:
            self.neighbors[node] = NeighborRecord(node, now, now, True)
            return Contact.NEW_CONTACT
        kind = (Contact.RECONNECT if now - rec.last_seen > self.params.contact_timeout
                else Contact.ONGOING)
        rec.last_seen = now
        rec.currently_connected = True
        return kind

    # -- housekeeping -----------------------------------------------------

    def expire_state(self, now: float) -> ExpiryReport:
        stale = [n for n, e in self.cache.items() if e.msg.is_expired(now)]
        for n in stale:
            del self.cache[n]
        dead = [k for k, r in self.interests.items() if now >= r.expires_at]
        for k in dead:
            del self.interests[k]
        gone = 0
        for rec in self.neighbors.values():
            if rec.currently_connected and now - rec.last_seen > self.params.contact_timeout:
                rec.currently_connected = False
                gone += 1
        return ExpiryReport(len(stale), len(dead), gone)
