"""Application-layer traffic models: generators, consumers and hybrids.

A hybrid node simply carries both a :class:`Generator` and a :class:`Consumer`.
Both return the engine's :class:`~keetchi.engine.KAction` so the caller (the
simulator) can execute it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidParam
from .model import DataMessage, DataName, FeedbackMessage, LayerSource, Valence, matches_prefix, parse_name


@dataclass(frozen=True)
class GeneratorConfig:
    name_prefix: DataName
    period: float = 60.0
    payload_size: int = 1024
    validity: float = 3600.0
    start: float = 0.0
    stop: float = float("inf")
    jitter: bool = False

    def __post_init__(self):
        object.__setattr__(self, "name_prefix", parse_name(self.name_prefix))
        if not self.period > 0:
            raise InvalidParam("period must be > 0", "period")
        if not self.validity > 0:
            raise InvalidParam("validity must be > 0", "validity")
        if self.payload_size < 0:
            raise InvalidParam("payload_size must be >= 0", "payload_size")
        if not self.start < self.stop:
            raise InvalidParam("start must precede stop", "start")


@dataclass(frozen=True)
class ConsumerConfig:
    """Preferences drive feedback.

    ``announce_at`` lists times at which the consumer proactively broadcasts
    its preferences as feedback, soliciting matching data before any arrives.
    """
    preferences: tuple = ()
    p_feedback: float = 1.0
    p_feedback_nonmatch: float = 0.0
    announce_at: tuple = ()

    def __post_init__(self):
        prefs = tuple((parse_name(n), v if isinstance(v, Valence) else Valence[v])
                      for n, v in self.preferences)
        object.__setattr__(self, "preferences", prefs)
        object.__setattr__(self, "announce_at", tuple(sorted(self.announce_at)))
        for p in ("p_feedback", "p_feedback_nonmatch"):
            if not 0.0 <= getattr(self, p) <= 1.0:
                raise InvalidParam(f"{p} must be in [0, 1]", p)

    def match(self, name: DataName):
        """Longest preference prefix matching ``name`` as ``(prefix, valence)``, or None."""
        best = None
        for prefix, valence in self.preferences:
            if matches_prefix(prefix, name) and (best is None or len(prefix) > len(best[0])):
                best = (prefix, valence)
        return best

    def wants(self, name: DataName) -> bool:
        m = self.match(name)
        return m is not None and m[1] is Valence.POSITIVE


class Generator:
    def __init__(self, cfg: GeneratorConfig):
        self.cfg = cfg
        self.seq = 0

    def first_fire(self) -> float:
        return self.cfg.start

    def on_timer(self, engine, now, rng=None):
        """Publish the next item; returns ``(action, next_fire_time)``.

        Either element may be None: no publication outside ``[start, stop)``,
        and no next timer once the window has closed.
        """
        cfg = self.cfg
        if not cfg.start <= now < cfg.stop:
            return None, None
        name = cfg.name_prefix.child(f"item-{self.seq}")
        self.seq += 1
        msg = DataMessage("", name, engine.self_id, now, cfg.payload_size, 0, cfg.validity)
        action = engine.process_data_msg(LayerSource.APP, msg, now)
        step = rng.exponential(cfg.period) if cfg.jitter else cfg.period
        nxt = now + step
        return action, (nxt if nxt < cfg.stop else None)


@dataclass
class Consumer:
    cfg: ConsumerConfig
    interested: int = 0
    uninterested: int = 0
    feedback_sent: list = field(default_factory=list)

    def _feedback(self, engine, target, valence, now):
        fb = FeedbackMessage("", target, valence, engine.self_id, now, 0,
                             engine.params.engine.feedback_hop_limit)
        self.feedback_sent.append((now, target, valence))
        return engine.process_feedback_msg(LayerSource.APP, fb, now)

    def on_delivery(self, engine, msg: DataMessage, now, rng):
        m = self.cfg.match(msg.name)
        if m is not None and m[1] is Valence.POSITIVE:
            self.interested += 1
        else:
            self.uninterested += 1
        if m is not None:
            if rng.random() < self.cfg.p_feedback:
                return self._feedback(engine, m[0], m[1], now)
        elif rng.random() < self.cfg.p_feedback_nonmatch:
            return self._feedback(engine, msg.name, Valence.NEGATIVE, now)
        return None

    def announce(self, engine, now):
        """Broadcast every preference as feedback; returns the KActions."""
        return [self._feedback(engine, prefix, valence, now)
                for prefix, valence in self.cfg.preferences]
