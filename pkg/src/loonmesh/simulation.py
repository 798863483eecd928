"""Deterministic event-script runner and the two comparison baselines.

Randomness comes only from per-event substreams: event ``i`` of a run with
seed ``s`` draws from ``PCG64(SeedSequence(s, spawn_key=(i,)))``. A SEND
consumes one uniform per hop, in hop order, so the protocol run and every
baseline see the same draws for the same event, and inserting an event
leaves the other events' streams untouched.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from . import protocol
from .geometry import PolarPosition
from .model import BalloonNode, LinkEdge, MeshParams, MeshTopology
from .protocol import UnknownDestination
from .routing import LinkProbabilityParams, NoRoute, best_path, link_failure_probability, min_hop_path
from .topology import add_node, build_mesh, drift_node, remove_node

log = logging.getLogger(__name__)

U64_MAX = 2**64 - 1


class InvalidScenario(ValueError):
    def __init__(self, message: str, event_index: Optional[int] = None):
        self.event_index = event_index
        where = f"event {event_index}: " if event_index is not None else ""
        super().__init__(where + message)


class SimulationError(RuntimeError):
    def __init__(self, event_index: int, cause: Exception):
        self.event_index = event_index
        self.cause = cause
        super().__init__(f"event {event_index}: {type(cause).__name__}: {cause}")


@dataclass(frozen=True)
class AddEvent:
    time: int
    node: BalloonNode
    kind = "ADD"


@dataclass(frozen=True)
class RemoveEvent:
    time: int
    id: str
    kind = "REMOVE"


@dataclass(frozen=True)
class DriftEvent:
    time: int
    id: str
    position: PolarPosition
    kind = "DRIFT"


@dataclass(frozen=True)
class SendEvent:
    time: int
    src: str
    dst: str
    kind = "SEND"


SimEvent = Union[AddEvent, RemoveEvent, DriftEvent, SendEvent]


@dataclass(frozen=True)
class ScenarioConfig:
    nodes: tuple[BalloonNode, ...]
    params: MeshParams = field(default_factory=MeshParams)
    events: tuple = ()
    rng_seed: int = 0


class Mode(str, enum.Enum):
    DCB = "DCB"
    ALL_ACTIVE = "ALL_ACTIVE"
    MIN_HOP = "MIN_HOP"


@dataclass
class MetricsReport:
    mode: str = Mode.DCB.value
    packets_sent: int = 0
    packets_delivered: int = 0
    packets_dropped_link: int = 0
    packets_failed_no_route: int = 0
    lookup_failures: int = 0
    lookup_messages: int = 0
    reconfig_messages: int = 0
    hull_recomputes: int = 0
    sector_reconfigs: int = 0
    subcritical_ticks: int = 0
    routed_hops: int = 0
    packets_routed: int = 0
    events: list = field(default_factory=list)

    @property
    def control_messages(self) -> int:
        return self.lookup_messages + self.reconfig_messages

    @property
    def pdr(self) -> Optional[float]:
        return self.packets_delivered / self.packets_sent if self.packets_sent else None

    @property
    def mean_hops(self) -> Optional[float]:
        return self.routed_hops / self.packets_routed if self.packets_routed else None

    def summary(self) -> dict:
        return {
            "mode": self.mode,
            "packets_sent": self.packets_sent,
            "packets_delivered": self.packets_delivered,
            "packets_dropped_link": self.packets_dropped_link,
            "packets_failed_no_route": self.packets_failed_no_route,
            "lookup_failures": self.lookup_failures,
            "pdr": self.pdr,
            "control_messages": self.control_messages,
            "lookup_messages": self.lookup_messages,
            "reconfig_messages": self.reconfig_messages,
            "mean_hops": self.mean_hops,
            "hull_recomputes": self.hull_recomputes,
            "sector_reconfigs": self.sector_reconfigs,
            "subcritical_ticks": self.subcritical_ticks,
        }


def event_stream(seed: int, event_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(event_index,))))


def validate_scenario(config: ScenarioConfig) -> None:
    """Check ordering and id references by replaying membership only."""
    if not 0 <= config.rng_seed <= U64_MAX:
        raise InvalidScenario("rng_seed must be an unsigned 64-bit integer")
    if not config.nodes:
        raise InvalidScenario("scenario needs at least one initial node")
    live: set[str] = set()
    for n in config.nodes:
        if n.id in live:
            raise InvalidScenario(f"duplicate initial node id {n.id!r}")
        live.add(n.id)
    last = None
    for i, ev in enumerate(config.events):
        if ev.time < 0:
            raise InvalidScenario("event time must be >= 0", i)
        if last is not None and ev.time < last:
            raise InvalidScenario("event times must be non-decreasing", i)
        last = ev.time
        if isinstance(ev, AddEvent):
            if ev.node.id in live:
                raise InvalidScenario(f"ADD of existing id {ev.node.id!r}", i)
            live.add(ev.node.id)
        elif isinstance(ev, RemoveEvent):
            if ev.id not in live:
                raise InvalidScenario(f"REMOVE of unknown id {ev.id!r}", i)
            if len(live) == 1:
                raise InvalidScenario("REMOVE would empty the network", i)
            live.discard(ev.id)
        elif isinstance(ev, DriftEvent):
            if ev.id not in live:
                raise InvalidScenario(f"DRIFT of unknown id {ev.id!r}", i)
        elif isinstance(ev, SendEvent):
            if ev.src == ev.dst:
                raise InvalidScenario("SEND needs src != dst", i)
            for nid in (ev.src, ev.dst):
                if nid not in live:
                    raise InvalidScenario(f"SEND references unknown id {nid!r}", i)
        else:
            raise InvalidScenario(f"unsupported event {ev!r}", i)


def all_active_view(topo: MeshTopology) -> MeshTopology:
    """Same graph with every node Ordinary and link probabilities recomputed."""
    nodes = protocol.flatten_roles(topo.nodes)
    lp = LinkProbabilityParams.from_mesh(topo.params)
    edges = {
        k: LinkEdge(k[0], k[1], e.distance, link_failure_probability(nodes[k[0]], nodes[k[1]], lp))
        for k, e in topo.edges.items()
    }
    return replace(topo, nodes=nodes, edges=edges, adjacency=topo.adjacency)


class _Runner:
    def __init__(self, config: ScenarioConfig, mode: Mode):
        self.config = config
        self.mode = mode
        self.report = MetricsReport(mode=mode.value)
        self.topo = build_mesh(config.nodes, config.params)
        self._directory = None
        self._view = None

    def _set_topology(self, topo: MeshTopology) -> None:
        self.topo = topo
        self._directory = None
        self._view = None

    @property
    def directory(self) -> protocol.LeaderDirectory:
        if self._directory is None:
            self._directory = protocol.build_directory(self.topo.partition, self.topo.points())
        return self._directory

    @property
    def routing_view(self) -> MeshTopology:
        if self.mode is not Mode.ALL_ACTIVE:
            return self.topo
        if self._view is None:
            self._view = all_active_view(self.topo)
        return self._view

    def churn(self, ev, entry: dict) -> None:
        if isinstance(ev, AddEvent):
            topo, rep = add_node(self.topo, ev.node)
        elif isinstance(ev, RemoveEvent):
            topo, rep = remove_node(self.topo, ev.id)
        else:
            topo, rep = drift_node(self.topo, ev.id, ev.position)
        self._set_topology(topo)
        r = self.report
        r.hull_recomputes += rep.hull_recomputed
        r.sector_reconfigs += rep.sector_reconfig
        # the flooding baseline keeps no leaders, so there is no one to notify
        notices = 0 if self.mode is Mode.ALL_ACTIVE else rep.control_messages
        r.reconfig_messages += notices
        entry.update(case=rep.case, control_messages=notices)

    def send(self, ev: SendEvent, index: int, entry: dict) -> None:
        r = self.report
        r.packets_sent += 1
        if self.mode is Mode.ALL_ACTIVE:
            lookup = len(self.topo.nodes)
        else:
            try:
                trace = protocol.gather_destination_info(ev.src, ev.dst, self.directory, self.topo.partition)
            except UnknownDestination:
                r.lookup_failures += 1
                r.packets_failed_no_route += 1
                entry.update(outcome="lookup_failed", control_messages=0)
                return
            lookup = trace.messages
            entry["control_hops"] = trace.control_hops
        r.lookup_messages += lookup
        entry["control_messages"] = lookup
        try:
            if self.mode is Mode.MIN_HOP:
                route = min_hop_path(self.topo, ev.src, ev.dst)
            else:
                route = best_path(self.routing_view, ev.src, ev.dst, exclude_passive=self.mode is Mode.DCB)
        except NoRoute:
            r.packets_failed_no_route += 1
            entry["outcome"] = "no_route"
            return
        view = self.routing_view
        probs = [view.edge(a, b).effective_probability for a, b in zip(route.path, route.path[1:])]
        draws = event_stream(self.config.rng_seed, index).random(len(probs))
        ok = all(u < q for u, q in zip(draws, probs))
        r.packets_routed += 1
        r.routed_hops += route.hop_count
        if ok:
            r.packets_delivered += 1
        else:
            r.packets_dropped_link += 1
        entry.update(
            outcome="delivered" if ok else "dropped",
            hops=route.hop_count,
            reliability=route.reliability,
            path=list(route.path),
        )

    def run(self) -> MetricsReport:
        events = sorted(enumerate(self.config.events), key=lambda ie: (ie[1].time, ie[0]))
        for pos, (index, ev) in enumerate(events):
            entry = {"index": index, "time": ev.time, "kind": ev.kind}
            try:
                if isinstance(ev, SendEvent):
                    entry.update(src=ev.src, dst=ev.dst)
                    self.send(ev, index, entry)
                else:
                    self.churn(ev, entry)
            except (InvalidScenario, SimulationError):
                raise
            except Exception as exc:  # noqa: BLE001 - surfaced with the event index
                raise SimulationError(index, exc) from exc
            entry["subcritical"] = self.topo.subcritical
            self.report.events.append(entry)
            last_of_tick = pos + 1 == len(events) or events[pos + 1][1].time != ev.time
            if last_of_tick and self.topo.subcritical:
                self.report.subcritical_ticks += 1
            log.debug("event %d %s -> %s", index, ev.kind, entry.get("outcome", entry.get("case")))
        return self.report


def run_scenario(config: ScenarioConfig) -> MetricsReport:
    validate_scenario(config)
    return _Runner(config, Mode.DCB).run()


def run_baseline(config: ScenarioConfig, mode: Union[Mode, str]) -> MetricsReport:
    mode = Mode(mode)
    validate_scenario(config)
    return _Runner(config, mode).run()


def run_mode(config: ScenarioConfig, mode: Union[Mode, str, None]) -> MetricsReport:
    mode = Mode(mode or Mode.DCB)
    return run_scenario(config) if mode is Mode.DCB else run_baseline(config, mode)


def final_topology(config: ScenarioConfig) -> MeshTopology:
    """Live topology after replaying every churn event (SENDs do not alter it)."""
    validate_scenario(config)
    topo = build_mesh(config.nodes, config.params)
    for ev in config.events:
        if isinstance(ev, AddEvent):
            topo, _ = add_node(topo, ev.node)
        elif isinstance(ev, RemoveEvent):
            topo, _ = remove_node(topo, ev.id)
        elif isinstance(ev, DriftEvent):
            topo, _ = drift_node(topo, ev.id, ev.position)
    return topo


def _random_node(rng: np.random.Generator, nid: str, area_radius: float) -> BalloonNode:
    r = area_radius * math.sqrt(rng.random())
    theta = float(rng.uniform(0.0, 2.0 * math.pi))
    max_load = int(rng.integers(50, 201))
    return BalloonNode(
        id=nid,
        position=PolarPosition(r, theta, float(rng.uniform(18.0, 22.0))),
        load=int(rng.integers(0, max_load // 2 + 1)),
        max_load=max_load,
        bandwidth=float(rng.uniform(5.0, 20.0)),
        signal_power=float(rng.uniform(0.8, 1.2)),
    )


def reference_scenario(
    seed: int,
    n_nodes: int = 30,
    n_sends: int = 100,
    n_churn: int = 12,
    area_radius: float = 70.0,
    params: Optional[MeshParams] = None,
) -> ScenarioConfig:
    """The comparison family: random disk layout, random traffic, light churn.

    Churn is split evenly between ADD, REMOVE and DRIFT and shuffled into
    the SEND stream, one event per tick.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0x5EED])))
    nodes = [_random_node(rng, f"b{i:03d}", area_radius) for i in range(n_nodes)]
    kinds = ["SEND"] * n_sends + ["ADD", "REMOVE", "DRIFT"] * (n_churn // 3)
    kinds += ["DRIFT"] * (n_churn % 3)
    order = rng.permutation(len(kinds))
    live = [n.id for n in nodes]
    next_id = n_nodes
    events: list = []
    for t, k in enumerate(order):
        kind = kinds[int(k)]
        if kind == "ADD":
            node = _random_node(rng, f"b{next_id:03d}", area_radius)
            next_id += 1
            live.append(node.id)
            events.append(AddEvent(t, node))
        elif kind == "REMOVE" and len(live) > 3:
            victim = live.pop(int(rng.integers(len(live))))
            events.append(RemoveEvent(t, victim))
        elif kind == "DRIFT" or kind == "REMOVE":
            nid = live[int(rng.integers(len(live)))]
            r = area_radius * math.sqrt(rng.random())
            events.append(DriftEvent(t, nid, PolarPosition(r, float(rng.uniform(0, 2 * math.pi)), 20.0)))
        else:
            a, b = rng.choice(len(live), size=2, replace=False)
            events.append(SendEvent(t, live[int(a)], live[int(b)]))
    return ScenarioConfig(tuple(nodes), params or MeshParams(), tuple(events), seed)
