"""Data types shared by the topology, protocol and routing layers."""

from __future__ import annotations

import enum
import math
from functools import cached_property
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

from .geometry import CartesianPoint, ConvexHull, PolarPosition, SectorPartition, to_cartesian


class MeshError(Exception):
    """Base class for protocol-level failures."""


class DuplicateNode(MeshError):
    pass


class UnknownNode(MeshError, KeyError):
    pass


class IsolatedNode(MeshError):
    pass


class Role(str, enum.Enum):
    CORE_ACTIVE = "CoreActive"
    PASSIVE = "Passive"
    ORDINARY = "Ordinary"


ROLE_LEVEL = {Role.CORE_ACTIVE: 0, Role.ORDINARY: 1, Role.PASSIVE: 2}


@dataclass(frozen=True)
class BalloonNode:
    id: str
    position: PolarPosition
    load: int = 0
    max_load: int = 100
    bandwidth: float = 10.0
    signal_power: float = 1.0
    reachable_from_gap: bool = False
    priority: int = 1
    role: Role = Role.ORDINARY

    def __post_init__(self):
        if self.max_load < 1:
            raise ValueError(f"{self.id}: max_load must be >= 1")
        if not 0 <= self.load <= self.max_load:
            raise ValueError(f"{self.id}: load must lie in [0, max_load]")
        if self.bandwidth <= 0 or self.signal_power <= 0:
            raise ValueError(f"{self.id}: bandwidth and signal_power must be > 0")
        if self.priority not in (0, 1, 2):
            raise ValueError(f"{self.id}: priority must be 0, 1 or 2")

    @cached_property
    def point(self) -> CartesianPoint:
        return to_cartesian(self.position)

    @property
    def load_fraction(self) -> float:
        return self.load / self.max_load


@dataclass(frozen=True)
class LinkEdge:
    endpoint_a: str
    endpoint_b: str
    distance: float
    failure_probability: float

    def __post_init__(self):
        if self.endpoint_a == self.endpoint_b:
            raise ValueError("self-loop")
        if self.endpoint_b < self.endpoint_a:
            a, b = self.endpoint_b, self.endpoint_a
            object.__setattr__(self, "endpoint_a", a)
            object.__setattr__(self, "endpoint_b", b)

    @property
    def key(self) -> tuple[str, str]:
        return (self.endpoint_a, self.endpoint_b)

    @property
    def effective_probability(self) -> float:
        return 1.0 - self.failure_probability


def edge_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class MeshParams:
    """Every tunable of the stack, flat so it maps onto the scenario file."""

    radio_range: float = 40.0
    density_threshold: float = 1e-3
    d_min: float = 0.1
    t_max: int = 8
    h_max: int = 3
    max_hop: int = 2
    alpha: float = 0.5
    beta: float = 0.3
    gamma: float = 0.2
    p_floor: float = 0.01
    p_ceil: float = 0.99
    gap_x: float = 0.0
    gap_y: float = 0.0
    gap_range: float = 40.0
    percolation_degree_threshold: float = 4.0

    def __post_init__(self):
        if self.radio_range <= 0 or self.d_min <= 0 or self.gap_range < 0:
            raise ValueError("radio_range and d_min must be > 0, gap_range >= 0")
        if self.density_threshold < 0:
            raise ValueError("density_threshold must be >= 0")
        if self.t_max < 1 or self.h_max < 1 or self.max_hop < 0:
            raise ValueError("t_max, h_max must be >= 1 and max_hop >= 0")
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("alpha, beta, gamma must be non-negative")
        if abs(self.alpha + self.beta + self.gamma - 1.0) > 1e-12:
            raise ValueError("alpha + beta + gamma must equal 1")
        if not 0.0 < self.p_floor < self.p_ceil < 1.0:
            raise ValueError("require 0 < p_floor < p_ceil < 1")
        if self.percolation_degree_threshold < 0:
            raise ValueError("percolation_degree_threshold must be >= 0")

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MeshTopology:
    nodes: dict[str, BalloonNode]
    edges: dict[tuple[str, str], LinkEdge]
    hull: Optional[ConvexHull]
    partition: SectorPartition
    mst_edges: frozenset
    subcritical: bool
    params: MeshParams
    isolated: frozenset = frozenset()
    adjacency: dict[str, frozenset] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not self.adjacency:
            adj: dict[str, set] = {nid: set() for nid in self.nodes}
            for a, b in self.edges:
                adj[a].add(b)
                adj[b].add(a)
            object.__setattr__(self, "adjacency", {k: frozenset(v) for k, v in adj.items()})

    def neighbors(self, nid: str) -> frozenset:
        return self.adjacency[nid]

    def degree(self, nid: str) -> int:
        return len(self.adjacency[nid])

    def edge(self, a: str, b: str) -> Optional[LinkEdge]:
        return self.edges.get(edge_key(a, b))

    def hull_vertices(self) -> frozenset:
        return self.hull.vertex_set if self.hull is not None else frozenset()

    def points(self) -> dict[str, CartesianPoint]:
        return {nid: n.point for nid, n in self.nodes.items()}

    @property
    def degenerate(self) -> bool:
        return self.hull is None

    def mean_degree(self) -> float:
        return 2.0 * len(self.edges) / len(self.nodes) if self.nodes else 0.0


def horizontal_distance(u: BalloonNode, v: BalloonNode) -> float:
    return u.point.distance(v.point)


def gap_distance(node: BalloonNode, params: MeshParams) -> float:
    """Slant range from the ground access point to the balloon."""
    p = node.point
    return math.sqrt((p.x - params.gap_x) ** 2 + (p.y - params.gap_y) ** 2 + node.position.altitude**2)
