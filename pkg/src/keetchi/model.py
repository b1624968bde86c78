"""Message and identity types, plus hierarchical name handling."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

from .errors import MalformedMessage, MalformedName

NodeId = int
BROADCAST = -1


@dataclass(frozen=True)
class DataName:
    """A CCN-style hierarchical name, e.g. ``/uni/recycler/chair-1``."""

    segments: tuple

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise MalformedName("name has no segments")
        for seg in self.segments:
            if not isinstance(seg, str) or not seg or "/" in seg:
                raise MalformedName(f"bad segment {seg!r}")

    def __str__(self):
        return "/" + "/".join(self.segments)

    def __repr__(self):
        return f"DataName({str(self)!r})"

    def __lt__(self, other):
        return str(self) < str(other)

    def __len__(self):
        return len(self.segments)

    def child(self, segment: str) -> DataName:
        return DataName(self.segments + (segment,))

    def prefixes(self):
        """All prefixes of this name, shortest first, including the name itself."""
        return [DataName(self.segments[:i]) for i in range(1, len(self.segments) + 1)]


def parse_name(text) -> DataName:
    if isinstance(text, DataName):
        return text
    if not isinstance(text, str) or not text:
        raise MalformedName("empty name")
    if not text.startswith("/"):
        raise MalformedName(f"{text!r}: missing leading '/'")
    parts = text[1:].split("/")
    if any(p == "" for p in parts):
        raise MalformedName(f"{text!r}: empty segment")
    return DataName(tuple(parts))


def matches_prefix(target: DataName, name: DataName) -> bool:
    """True iff ``target``'s segments are a (possibly improper) prefix of ``name``'s."""
    n = len(target.segments)
    return n <= len(name.segments) and name.segments[:n] == target.segments


def next_msg_id(node: NodeId, counter: int) -> str:
    return f"{node}:{counter}"


class Valence(enum.Enum):
    POSITIVE = 1
    NEGATIVE = -1

    @property
    def reward(self) -> float:
        return float(self.value)


class LayerSource(enum.Enum):
    APP = "app"
    LINK = "link"


@dataclass(frozen=True)
class DataMessage:
    msg_id: str
    name: DataName
    origin: NodeId
    created_at: float
    payload_size: int = 0
    hop_count: int = 0
    validity: float = 3600.0

    @property
    def expires_at(self) -> float:
        return self.created_at + self.validity

    def is_expired(self, now: float) -> bool:
        return now >= self.created_at + self.validity

    def validate(self):
        if not isinstance(self.name, DataName):
            raise MalformedMessage(f"name must be a DataName, got {self.name!r}")
        if self.hop_count < 0:
            raise MalformedMessage("hop_count < 0")
        if self.payload_size < 0:
            raise MalformedMessage("payload_size < 0")
        if not self.validity > 0:
            raise MalformedMessage("validity must be > 0")


@dataclass(frozen=True)
class FeedbackMessage:
    msg_id: str
    target: DataName
    valence: Valence
    origin: NodeId
    created_at: float
    hop_count: int = 0
    hop_limit: int = 2

    @property
    def reward(self) -> float:
        return self.valence.reward

    def validate(self):
        if not isinstance(self.target, DataName):
            raise MalformedMessage(f"target must be a DataName, got {self.target!r}")
        if not isinstance(self.valence, Valence):
            raise MalformedMessage(f"bad valence {self.valence!r}")
        if self.hop_limit < 1:
            raise MalformedMessage("hop_limit must be positive")
        if not 0 <= self.hop_count <= self.hop_limit:
            raise MalformedMessage("hop_count outside [0, hop_limit]")


Message = Union[DataMessage, FeedbackMessage]
