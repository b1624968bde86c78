"""Opportunistic, information-centric dissemination with feedback-driven caching.

The :class:`~keetchi.engine.Engine` is the per-node protocol layer; the
:mod:`keetchi.netsim` simulator and :mod:`keetchi.scenario` runner exercise it
over simulated contacts.
"""
from .apps import Consumer, ConsumerConfig, Generator, GeneratorConfig
from .engine import (Emission, Engine, EngineParams, KAction, NodeParams, Snapshot, StatEvent,
                     StatKind, engine_init)
from .errors import (CausalityViolation, ClockSkew, Expired, InvalidParam, KeetchiError,
                     MalformedConfig, MalformedMessage, MalformedName, MalformedTrace,
                     NotPositional)
from .learning import LearningParams, QEntry, freshness, goodness, popularity, q_update
from .model import (BROADCAST, DataMessage, DataName, FeedbackMessage, LayerSource, NodeId,
                    Valence, matches_prefix, next_msg_id, parse_name)
from .netsim import (Event, EventKind, EventQueue, LinkModel, RandomWaypoint, Simulator,
                     StaticMobility, TraceMobility, Trajectory, load_contact_trace,
                     parse_contact_trace)
from .scenario import ScenarioConfig, build_simulation, load_config, parse_config, run_scenario
from .stats import StatsLedger, compute_metrics, write_stats
from .store import (CacheEntry, Contact, DataStore, InterestRecord, NeighborRecord,
                    StoreParams)

__version__ = "0.1.0"
