"""Scenario configuration (JSON) and end-to-end scenario runs.

A scenario file looks like::

    {
      "seed": 7,
      "duration": 600,
      "nodes": [{"id": 1, "position": [0, 0]}, {"id": 2, "position": [5, 0]}],
      "link": {"radius": 10, "beacon_interval": 1},
      "mobility": {"model": "static"},
      "apps": [
        {"nodes": [1], "generator": {"name_prefix": "/uni/recycler", "period": 60}},
        {"nodes": [2], "consumer": {"preferences": [["/uni/recycler", "POSITIVE"]]}}
      ]
    }

Every group (``learning``, ``store``, ``engine``, ``link``, ``mobility``) is
optional and falls back to defaults. Unknown keys are rejected.
"""
from __future__ import annotations

import json
import os
from dataclasses import MISSING, dataclass, field, fields, replace
from typing import Optional

from .apps import Consumer, ConsumerConfig, Generator, GeneratorConfig
from .engine import Engine, EngineParams, NodeParams
from .errors import InvalidParam, MalformedConfig, MalformedName, MalformedTrace
from .learning import LearningParams
from .netsim import (LinkModel, RandomWaypoint, Simulator, StaticMobility, TraceMobility,
                     derive_streams, load_contact_trace)
from .stats import StatsLedger
from .store import StoreParams


@dataclass(frozen=True)
class MobilityConfig:
    model: str = "static"
    width: float = 1000.0
    height: float = 1000.0
    speed_min: float = 0.5
    speed_max: float = 2.0
    pause: float = 30.0
    trace: Optional[str] = None

    def __post_init__(self):
        if self.model not in ("static", "random_waypoint", "trace"):
            raise InvalidParam(f"unknown mobility model {self.model!r}", "model")
        if not (self.width > 0 and self.height > 0):
            raise InvalidParam("area must have positive width and height", "width")
        if not 0 < self.speed_min <= self.speed_max:
            raise InvalidParam("need 0 < speed_min <= speed_max", "speed_min")
        if self.pause < 0:
            raise InvalidParam("pause must be >= 0", "pause")
        if self.model == "trace" and not self.trace:
            raise InvalidParam("trace model needs a trace file", "trace")


@dataclass(frozen=True)
class NodeSpec:
    id: int
    position: Optional[tuple] = None


@dataclass(frozen=True)
class AppSpec:
    nodes: tuple
    generator: Optional[GeneratorConfig] = None
    consumer: Optional[ConsumerConfig] = None


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 0
    duration: float = 3600.0
    nodes: tuple = ()
    learning: LearningParams = LearningParams()
    store: StoreParams = StoreParams()
    engine: EngineParams = EngineParams()
    link: LinkModel = LinkModel()
    mobility: MobilityConfig = MobilityConfig()
    apps: tuple = ()
    base_dir: str = "."
    contacts: Optional[tuple] = field(default=None, compare=False)

    @property
    def node_params(self) -> NodeParams:
        return NodeParams(self.learning, self.store, self.engine)

    @property
    def node_ids(self):
        return [n.id for n in self.nodes]


# -- parsing ------------------------------------------------------------------

def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _check_type(f, value, path):
    default = f.default
    if default is MISSING or default is None or value is None:
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise MalformedConfig(path, "expected true/false")
    elif isinstance(default, int):
        if not isinstance(value, int) or isinstance(value, bool):
            raise MalformedConfig(path, "expected an integer")
    elif isinstance(default, float):
        if not _is_number(value):
            raise MalformedConfig(path, "expected a number")
        return float(value)
    elif isinstance(default, str) and not isinstance(value, str):
        raise MalformedConfig(path, "expected a string")
    return value


def _build(cls, data, path, **extra):
    if not isinstance(data, dict):
        raise MalformedConfig(path, "expected an object")
    known = {f.name: f for f in fields(cls)}
    kwargs = dict(extra)
    for key, value in data.items():
        if key not in known or key in extra:
            raise MalformedConfig(f"{path}.{key}", "unknown key")
        kwargs[key] = _check_type(known[key], value, f"{path}.{key}")
    try:
        return cls(**kwargs)
    except InvalidParam as exc:
        key = f"{path}.{exc.field}" if exc.field else path
        raise MalformedConfig(key, str(exc)) from None
    except MalformedName as exc:
        raise MalformedConfig(path, str(exc)) from None
    except TypeError as exc:
        raise MalformedConfig(path, str(exc)) from None


def _parse_nodes(raw):
    if isinstance(raw, int) and not isinstance(raw, bool):
        if raw < 0:
            raise MalformedConfig("nodes", "node count must be >= 0")
        return tuple(NodeSpec(i) for i in range(raw))
    if not isinstance(raw, list):
        raise MalformedConfig("nodes", "expected a count or a list of nodes")
    out, seen = [], set()
    for i, item in enumerate(raw):
        path = f"nodes[{i}]"
        if isinstance(item, int) and not isinstance(item, bool):
            item = {"id": item}
        if not isinstance(item, dict):
            raise MalformedConfig(path, "expected an object")
        for key in item:
            if key not in ("id", "position"):
                raise MalformedConfig(f"{path}.{key}", "unknown key")
        nid = item.get("id")
        if not isinstance(nid, int) or isinstance(nid, bool) or nid < 0:
            raise MalformedConfig(f"{path}.id", "expected a non-negative integer")
        if nid in seen:
            raise MalformedConfig(f"{path}.id", f"duplicate node id {nid}")
        seen.add(nid)
        pos = item.get("position")
        if pos is not None:
            if not (isinstance(pos, list) and len(pos) == 2 and all(map(_is_number, pos))):
                raise MalformedConfig(f"{path}.position", "expected [x, y]")
            pos = (float(pos[0]), float(pos[1]))
        out.append(NodeSpec(nid, pos))
    return tuple(out)


def _select_nodes(sel, ids, path):
    if sel == "all":
        return tuple(ids)
    if isinstance(sel, dict):
        if set(sel) != {"from", "to"}:
            raise MalformedConfig(path, "range selector needs exactly 'from' and 'to'")
        chosen = tuple(n for n in ids if sel["from"] <= n <= sel["to"])
    elif isinstance(sel, list):
        chosen = tuple(sel)
    else:
        raise MalformedConfig(path, "expected \"all\", a list of ids, or {from, to}")
    missing = [n for n in chosen if n not in ids]
    if missing:
        raise MalformedConfig(path, f"unknown node ids {missing}")
    return chosen


def _parse_apps(raw, ids):
    if not isinstance(raw, list):
        raise MalformedConfig("apps", "expected a list")
    out = []
    has_gen, has_cons = set(), set()
    for i, item in enumerate(raw):
        path = f"apps[{i}]"
        if not isinstance(item, dict):
            raise MalformedConfig(path, "expected an object")
        for key in item:
            if key not in ("nodes", "generator", "consumer"):
                raise MalformedConfig(f"{path}.{key}", "unknown key")
        nodes = _select_nodes(item.get("nodes", "all"), ids, f"{path}.nodes")
        gen = cons = None
        if "generator" in item:
            g = item["generator"]
            if not isinstance(g, dict) or "name_prefix" not in g:
                raise MalformedConfig(f"{path}.generator", "needs name_prefix")
            gen = _build(GeneratorConfig, g, f"{path}.generator")
            _claim(has_gen, nodes, f"{path}.generator", "generator")
        if "consumer" in item:
            c = item["consumer"]
            if isinstance(c, dict):
                c = dict(c)
                prefs = c.get("preferences", [])
                if not isinstance(prefs, list) or not all(
                        isinstance(p, list) and len(p) == 2 for p in prefs):
                    raise MalformedConfig(f"{path}.consumer.preferences",
                                          "expected a list of [prefix, valence] pairs")
                if any(p[1] not in ("POSITIVE", "NEGATIVE") for p in prefs):
                    raise MalformedConfig(f"{path}.consumer.preferences",
                                          "valence must be POSITIVE or NEGATIVE")
                c["preferences"] = tuple(tuple(p) for p in prefs)
                c["announce_at"] = tuple(c.get("announce_at", ()))
            cons = _build(ConsumerConfig, c, f"{path}.consumer")
            _claim(has_cons, nodes, f"{path}.consumer", "consumer")
        out.append(AppSpec(nodes, gen, cons))
    return tuple(out)


def _claim(taken, nodes, path, what):
    dup = taken.intersection(nodes)
    if dup:
        raise MalformedConfig(path, f"nodes {sorted(dup)} already have a {what}")
    taken.update(nodes)


def parse_config(data, base_dir=".") -> ScenarioConfig:
    if not isinstance(data, dict):
        raise MalformedConfig("", "top level must be an object")
    allowed = {"seed", "duration", "nodes", "learning", "store", "engine", "link",
               "mobility", "apps"}
    for key in data:
        if key not in allowed:
            raise MalformedConfig(key, "unknown key")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise MalformedConfig("seed", "expected a non-negative integer")
    duration = data.get("duration", 3600.0)
    if not _is_number(duration) or duration < 0:
        raise MalformedConfig("duration", "expected a non-negative number")
    nodes = _parse_nodes(data.get("nodes", []))
    ids = [n.id for n in nodes]
    link = _build(LinkModel, data.get("link", {}), "link")
    store_raw = dict(data.get("store", {})) if isinstance(data.get("store", {}), dict) else None
    if store_raw is None:
        raise MalformedConfig("store", "expected an object")
    store_raw.setdefault("contact_timeout", 3 * link.beacon_interval)
    cfg = ScenarioConfig(
        seed=seed,
        duration=float(duration),
        nodes=nodes,
        learning=_build(LearningParams, data.get("learning", {}), "learning"),
        store=_build(StoreParams, store_raw, "store"),
        engine=_build(EngineParams, data.get("engine", {}), "engine"),
        link=link,
        mobility=_build(MobilityConfig, data.get("mobility", {}), "mobility"),
        apps=_parse_apps(data.get("apps", []), ids),
        base_dir=str(base_dir),
    )
    return _resolve_trace(cfg)


def _resolve_trace(cfg: ScenarioConfig) -> ScenarioConfig:
    if cfg.mobility.model != "trace":
        return replace(cfg, contacts=None)
    path = os.path.join(cfg.base_dir, cfg.mobility.trace)
    try:
        contacts = load_contact_trace(path)
    except OSError as exc:
        raise MalformedConfig("mobility.trace", f"cannot read {path}: {exc.strerror}") from None
    except MalformedTrace as exc:
        raise MalformedConfig("mobility.trace", f"{path}: {exc}") from None
    ids = set(cfg.node_ids)
    unknown = sorted({n for c in contacts for n in (c.a, c.b)} - ids)
    if unknown:
        raise MalformedConfig("mobility.trace", f"trace mentions unknown nodes {unknown}")
    return replace(cfg, contacts=tuple(contacts))


def load_config(path) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise MalformedConfig("", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise MalformedConfig("", f"{path}: invalid JSON: {exc}") from None
    return parse_config(data, os.path.dirname(os.path.abspath(path)))


def with_overrides(cfg: ScenarioConfig, seed=None, trace=None) -> ScenarioConfig:
    """Apply command-line overrides; ``trace`` switches mobility to trace replay."""
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    if trace is not None:
        cfg = replace(cfg, mobility=replace(cfg.mobility, model="trace",
                                            trace=os.path.abspath(trace)))
        cfg = _resolve_trace(cfg)
    return cfg


# -- running ------------------------------------------------------------------

def build_mobility(cfg: ScenarioConfig, rng):
    mob = cfg.mobility
    ids = cfg.node_ids
    if mob.model == "trace":
        return TraceMobility(cfg.contacts or ())
    if mob.model == "random_waypoint":
        return RandomWaypoint(ids, mob.width, mob.height, mob.speed_min, mob.speed_max,
                              mob.pause, rng)
    positions = {}
    for n in cfg.nodes:
        if n.position is not None:
            positions[n.id] = n.position
        else:
            positions[n.id] = tuple(rng.uniform((0.0, 0.0), (mob.width, mob.height)))
    return StaticMobility(positions)


def build_simulation(cfg: ScenarioConfig) -> Simulator:
    streams = derive_streams(cfg.seed)
    sim = Simulator(cfg.link, build_mobility(cfg, streams["mobility"]), cfg.seed)
    gens, conss = {}, {}
    for spec in cfg.apps:
        for n in spec.nodes:
            if spec.generator is not None:
                gens[n] = spec.generator
            if spec.consumer is not None:
                conss[n] = spec.consumer
    params = cfg.node_params
    for n in cfg.node_ids:
        gen = Generator(gens[n]) if n in gens else None
        cons = Consumer(conss[n]) if n in conss else None
        sim.add_node(Engine(n, params), gen, cons)
    return sim


def run_scenario(cfg: ScenarioConfig) -> StatsLedger:
    return build_simulation(cfg).run(cfg.duration)
