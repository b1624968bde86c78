"""Goodness model: per-name Q estimates driven by feedback rewards.

Each named item carries a :class:`QEntry`. Feedback of valence +1/-1 moves the
estimate with an exponential-average update, and the composite goodness score
mixes that usefulness estimate with popularity and freshness.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ClockSkew, InvalidParam


@dataclass
class QEntry:
    q: float = 0.0
    n_pos: int = 0
    n_neg: int = 0
    last_update: float = 0.0

    def copy(self) -> QEntry:
        return QEntry(self.q, self.n_pos, self.n_neg, self.last_update)


@dataclass(frozen=True)
class LearningParams:
    alpha: float = 0.5
    q0: float = 0.0
    tau: float = 900.0
    w_u: float = 0.5
    w_p: float = 0.2
    w_f: float = 0.3
    g_min: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidParam(f"alpha={self.alpha} not in (0, 1]", "alpha")
        if not -1.0 <= self.q0 <= 1.0:
            raise InvalidParam(f"q0={self.q0} not in [-1, 1]", "q0")
        if not self.tau > 0:
            raise InvalidParam(f"tau={self.tau} must be > 0", "tau")
        for w in ("w_u", "w_p", "w_f"):
            if getattr(self, w) < 0:
                raise InvalidParam(f"{w} must be non-negative", w)
        if abs(self.w_u + self.w_p + self.w_f - 1.0) > 1e-9:
            raise InvalidParam("w_u + w_p + w_f must equal 1", "w_u")
        if not 0.0 <= self.g_min < 1.0:
            raise InvalidParam(f"g_min={self.g_min} not in [0, 1)", "g_min")


def q_update(q: float, reward: float, alpha: float) -> float:
    """Move ``q`` a fraction ``alpha`` of the way towards ``reward``."""
    if not 0.0 < alpha <= 1.0:
        raise InvalidParam(f"alpha={alpha} not in (0, 1]", "alpha")
    if alpha == 1.0:
        return reward
    return q + alpha * (reward - q)


def freshness(created_at: float, now: float, tau: float) -> float:
    """Half-life decay: 1 at creation, 0.5 after ``tau`` seconds."""
    if now < created_at:
        raise ClockSkew(f"now={now} precedes created_at={created_at}")
    if not tau > 0:
        raise InvalidParam(f"tau={tau} must be > 0", "tau")
    return 2.0 ** (-(now - created_at) / tau)


def popularity(n_pos: int, n_neg: int) -> float:
    return n_pos / (n_pos + n_neg + 1)


def goodness(entry: QEntry, created_at: float, now: float, params: LearningParams) -> float:
    usefulness = (entry.q + 1.0) / 2.0
    g = (params.w_u * usefulness
         + params.w_p * popularity(entry.n_pos, entry.n_neg)
         + params.w_f * freshness(created_at, now, params.tau))
    # rounding in the weighted sum can overshoot by an ulp
    return min(1.0, max(0.0, g))


def apply_reward(entry: QEntry, reward: float, now: float, alpha: float) -> None:
    """Fold one feedback reward into ``entry`` in place."""
    entry.q = q_update(entry.q, reward, alpha)
    if reward > 0:
        entry.n_pos += 1
    elif reward < 0:
        entry.n_neg += 1
    entry.last_update = now
