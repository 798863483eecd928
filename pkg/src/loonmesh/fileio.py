"""Scenario and metrics JSON documents.

Scenario files are validated with pydantic (unknown keys rejected, params
partial with defaults). Metrics files are written with every float rounded
to 12 significant digits so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .geometry import PolarPosition
from .model import BalloonNode, MeshParams
from .simulation import (
    U64_MAX,
    AddEvent,
    DriftEvent,
    MetricsReport,
    RemoveEvent,
    ScenarioConfig,
    SendEvent,
)

SPEC_VERSION = 1
TWO_PI = 2.0 * math.pi


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True)


class PositionModel(_Strict):
    radius: float = Field(ge=0, allow_inf_nan=False)
    angle: float = Field(allow_inf_nan=False)
    altitude: float = Field(default=20.0, ge=0, allow_inf_nan=False)

    @field_validator("angle")
    @classmethod
    def _radians_only(cls, v: float) -> float:
        if abs(v) > TWO_PI:
            raise ValueError("angle must be in radians (|angle| <= 2*pi); degrees are not accepted")
        return v


class NodeModel(PositionModel):
    id: str = Field(min_length=1)
    load: int = Field(default=0, ge=0)
    max_load: int = Field(default=100, ge=1)
    bandwidth: float = Field(default=10.0, gt=0, allow_inf_nan=False)
    signal_power: float = Field(default=1.0, gt=0, allow_inf_nan=False)


class ParamsModel(_Strict):
    radio_range: float = Field(default=MeshParams.radio_range, gt=0)
    density_threshold: float = Field(default=MeshParams.density_threshold, ge=0)
    d_min: float = Field(default=MeshParams.d_min, gt=0)
    t_max: int = Field(default=MeshParams.t_max, ge=1)
    h_max: int = Field(default=MeshParams.h_max, ge=1)
    max_hop: int = Field(default=MeshParams.max_hop, ge=0)
    alpha: float = Field(default=MeshParams.alpha, ge=0)
    beta: float = Field(default=MeshParams.beta, ge=0)
    gamma: float = Field(default=MeshParams.gamma, ge=0)
    p_floor: float = Field(default=MeshParams.p_floor, gt=0, lt=1)
    p_ceil: float = Field(default=MeshParams.p_ceil, gt=0, lt=1)
    gap_x: float = MeshParams.gap_x
    gap_y: float = MeshParams.gap_y
    gap_range: float = Field(default=MeshParams.gap_range, ge=0)
    percolation_degree_threshold: float = Field(default=MeshParams.percolation_degree_threshold, ge=0)


class AddModel(_Strict):
    time: int = Field(ge=0)
    kind: Literal["ADD"]
    node: NodeModel


class RemoveModel(_Strict):
    time: int = Field(ge=0)
    kind: Literal["REMOVE"]
    id: str


class DriftModel(_Strict):
    time: int = Field(ge=0)
    kind: Literal["DRIFT"]
    id: str
    position: PositionModel


class SendModel(_Strict):
    time: int = Field(ge=0)
    kind: Literal["SEND"]
    src: str
    dst: str


EventModel = Annotated[Union[AddModel, RemoveModel, DriftModel, SendModel], Field(discriminator="kind")]


class ScenarioFile(_Strict):
    spec_version: Literal[1]
    nodes: list[NodeModel]
    params: ParamsModel = Field(default_factory=ParamsModel)
    events: list[EventModel] = Field(default_factory=list)
    seed: int = Field(default=0, ge=0, le=U64_MAX)


class ScenarioError(ValueError):
    """Schema failure; ``path`` is the first offending location, dotted."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


def _position(m: PositionModel) -> PolarPosition:
    return PolarPosition(m.radius, m.angle, m.altitude)


def _node(m: NodeModel, where: str) -> BalloonNode:
    try:
        return BalloonNode(
            id=m.id,
            position=_position(m),
            load=m.load,
            max_load=m.max_load,
            bandwidth=m.bandwidth,
            signal_power=m.signal_power,
        )
    except ValueError as exc:
        raise ScenarioError(where, str(exc)) from exc


def config_from_model(doc: ScenarioFile) -> ScenarioConfig:
    nodes = tuple(_node(n, f"nodes.{i}") for i, n in enumerate(doc.nodes))
    try:
        params = MeshParams(**doc.params.model_dump())
    except ValueError as exc:
        raise ScenarioError("params", str(exc)) from exc
    events = []
    for i, ev in enumerate(doc.events):
        if isinstance(ev, AddModel):
            events.append(AddEvent(ev.time, _node(ev.node, f"events.{i}.node")))
        elif isinstance(ev, RemoveModel):
            events.append(RemoveEvent(ev.time, ev.id))
        elif isinstance(ev, DriftModel):
            events.append(DriftEvent(ev.time, ev.id, _position(ev.position)))
        else:
            events.append(SendEvent(ev.time, ev.src, ev.dst))
    return ScenarioConfig(nodes, params, tuple(events), doc.seed)


def parse_scenario(data: Any) -> ScenarioConfig:
    try:
        doc = ScenarioFile.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        path = ".".join(str(p) for p in first["loc"])
        raise ScenarioError(path, first["msg"]) from None
    return config_from_model(doc)


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    """Read and validate a scenario file.

    ``OSError`` propagates for unreadable files; malformed JSON and schema
    problems raise :class:`ScenarioError`.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("", f"invalid JSON: {exc}") from None
    return parse_scenario(data)


def _node_dict(n: BalloonNode) -> dict:
    return {
        "id": n.id,
        "radius": n.position.radius,
        "angle": n.position.angle,
        "altitude": n.position.altitude,
        "load": n.load,
        "max_load": n.max_load,
        "bandwidth": n.bandwidth,
        "signal_power": n.signal_power,
    }


def _position_dict(p: PolarPosition) -> dict:
    return {"radius": p.radius, "angle": p.angle, "altitude": p.altitude}


def scenario_to_dict(config: ScenarioConfig) -> dict:
    events = []
    for ev in config.events:
        if isinstance(ev, AddEvent):
            events.append({"time": ev.time, "kind": "ADD", "node": _node_dict(ev.node)})
        elif isinstance(ev, RemoveEvent):
            events.append({"time": ev.time, "kind": "REMOVE", "id": ev.id})
        elif isinstance(ev, DriftEvent):
            events.append({"time": ev.time, "kind": "DRIFT", "id": ev.id, "position": _position_dict(ev.position)})
        else:
            events.append({"time": ev.time, "kind": "SEND", "src": ev.src, "dst": ev.dst})
    return {
        "spec_version": SPEC_VERSION,
        "nodes": [_node_dict(n) for n in config.nodes],
        "params": config.params.to_dict(),
        "events": events,
        "seed": config.rng_seed,
    }


def dump_scenario(config: ScenarioConfig, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(config), indent=2) + "\n", encoding="utf-8")


def round_sig(value: Any, digits: int = 12) -> Any:
    """Round every float in a JSON-like tree to ``digits`` significant digits."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return float(f"{value:.{digits}g}")
    if isinstance(value, dict):
        return {k: round_sig(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_sig(v, digits) for v in value]
    return value


def metrics_document(report: MetricsReport, config: ScenarioConfig) -> dict:
    return round_sig(
        {
            "spec_version": SPEC_VERSION,
            "seed": config.rng_seed,
            "params": config.params.to_dict(),
            "metrics": report.summary(),
            "events": report.events,
        }
    )


def metrics_json(report: MetricsReport, config: ScenarioConfig) -> str:
    return json.dumps(metrics_document(report, config), indent=2, sort_keys=False) + "\n"


_COUNTERS = (
    "packets_sent",
    "packets_delivered",
    "packets_dropped_link",
    "packets_failed_no_route",
    "lookup_failures",
    "lookup_messages",
    "reconfig_messages",
    "hull_recomputes",
    "sector_reconfigs",
    "subcritical_ticks",
)


def report_from_document(doc: dict) -> MetricsReport:
    """Rebuild a report from a metrics document (inverse of ``metrics_document``)."""
    m = doc["metrics"]
    report = MetricsReport(mode=m["mode"], events=list(doc.get("events", [])))
    for name in _COUNTERS:
        setattr(report, name, m[name])
    routed = [e for e in report.events if "hops" in e]
    report.packets_routed = len(routed)
    report.routed_hops = sum(e["hops"] for e in routed)
    return report


CSV_FIELDS = ("index", "time", "kind", "src", "dst", "outcome", "hops", "reliability",
              "control_messages", "control_hops", "case", "subcritical")


def events_csv(report: MetricsReport) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for e in round_sig(report.events):
        w.writerow(e)
    return buf.getvalue()
