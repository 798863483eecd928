"""Planar geometry for the balloon mesh: projection, hull, sectors.

All hull and sector math runs on the horizontal projection of node
positions; altitude is carried on :class:`PolarPosition` but never enters
these computations.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Optional

TWO_PI = 2.0 * math.pi
EPS_KM = 1e-9

NodeId = Hashable


class DegenerateInput(ValueError):
    """Fewer than three points, or every point on one line."""


def normalize_angle(angle: float) -> float:
    a = math.fmod(angle, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    # fmod of a tiny negative value can round back up to exactly 2*pi
    if a >= TWO_PI:
        a = 0.0
    return a


@dataclass(frozen=True)
class PolarPosition:
    radius: float
    angle: float
    altitude: float = 0.0

    def __post_init__(self):
        for name in ("radius", "angle", "altitude"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.radius < 0.0:
            raise ValueError("radius must be >= 0")
        if self.altitude < 0.0:
            raise ValueError("altitude must be >= 0")
        object.__setattr__(self, "angle", normalize_angle(self.angle))

    @classmethod
    def from_cartesian(cls, x: float, y: float, altitude: float = 0.0) -> "PolarPosition":
        return cls(math.hypot(x, y), math.atan2(y, x), altitude)


@dataclass(frozen=True)
class CartesianPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("CartesianPoint coordinates must be finite")

    def __sub__(self, other: "CartesianPoint") -> tuple[float, float]:
        return (self.x - other.x, self.y - other.y)

    def distance(self, other: "CartesianPoint") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


def to_cartesian(p: PolarPosition) -> CartesianPoint:
    return CartesianPoint(p.radius * math.cos(p.angle), p.radius * math.sin(p.angle))


def cross(o: CartesianPoint, a: CartesianPoint, b: CartesianPoint) -> float:
    """z-component of (a - o) x (b - o); positive for a left turn."""
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)


@dataclass(frozen=True)
class ConvexHull:
    """Counterclockwise strict-turn hull.

    ``vertices`` holds node ids; ``polygon`` holds the matching points in
    the same order so containment checks do not need the node table.
    """

    vertices: tuple
    polygon: tuple[CartesianPoint, ...]
    centroid: CartesianPoint

    @property
    def vertex_set(self) -> frozenset:
        return frozenset(self.vertices)

    def classify(self, pt: CartesianPoint, tol: float = EPS_KM) -> str:
        """Return ``"inside"``, ``"boundary"`` or ``"outside"``.

        The cross product is scaled by edge length so ``tol`` is a distance.
        """
        n = len(self.polygon)
        on_edge = False
        for i in range(n):
            a = self.polygon[i]
            b = self.polygon[(i + 1) % n]
            length = a.distance(b)
            signed = cross(a, b, pt) / length
            if signed < -tol:
                return "outside"
            if signed <= tol:
                on_edge = True
        return "boundary" if on_edge else "inside"

    def contains(self, pt: CartesianPoint, tol: float = EPS_KM) -> bool:
        return self.classify(pt, tol) != "outside"


def compute_convex_hull(points: Mapping[NodeId, CartesianPoint]) -> ConvexHull:
    """Andrew's monotone chain, dropping collinear boundary points.

    Points sharing exact coordinates collapse to the one with the smallest
    id, so at most one of them can be a hull vertex.
    """
    order = []
    for item in sorted(points.items(), key=lambda kv: (kv[1].x, kv[1].y, kv[0])):
        if not order or (order[-1][1].x, order[-1][1].y) != (item[1].x, item[1].y):
            order.append(item)
    if len(order) < 3:
        raise DegenerateInput(f"need at least 3 distinct points, got {len(order)}")

    def half(seq):
        chain: list = []
        for item in seq:
            while len(chain) >= 2 and cross(chain[-2][1], chain[-1][1], item[1]) <= 0.0:
                chain.pop()
            chain.append(item)
        return chain

    lower = half(order)
    upper = half(reversed(order))
    ring = lower[:-1] + upper[:-1]
    if len(ring) < 3:
        raise DegenerateInput("all points are collinear")
    ids = tuple(k for k, _ in ring)
    poly = tuple(p for _, p in ring)
    cx = sum(p.x for p in poly) / len(poly)
    cy = sum(p.y for p in poly) / len(poly)
    return ConvexHull(ids, poly, CartesianPoint(cx, cy))


def sector_angle(n_total: int, n_hull: int, t_max: int, h_max: int) -> tuple[int, float]:
    """Sector count and wedge angle.

    ``t_max`` caps nodes per sector and ``h_max`` caps hull vertices per
    sector; the larger requirement wins.
    """
    if n_total < 1 or n_hull < 0 or t_max < 1 or h_max < 1:
        raise ValueError("invalid sector sizing arguments")
    s = max(1, math.ceil(n_total / t_max), math.ceil(n_hull / h_max))
    return s, TWO_PI / s


@dataclass(frozen=True)
class Sector:
    index: int
    members: frozenset = frozenset()
    leader: Optional[NodeId] = None


@dataclass(frozen=True)
class SectorPartition:
    sector_count: int
    sector_angle: float
    origin: CartesianPoint
    sectors: tuple[Sector, ...] = field(default_factory=tuple)

    def sector_of(self, node: NodeId) -> int:
        for s in self.sectors:
            if node in s.members:
                return s.index
        raise KeyError(node)

    def membership(self) -> dict:
        return {m: s.index for s in self.sectors for m in s.members}

    def leaders(self) -> dict[int, NodeId]:
        return {s.index: s.leader for s in self.sectors if s.leader is not None}


def sector_index(pt: CartesianPoint, origin: CartesianPoint, sector_count: int) -> int:
    dx, dy = pt.x - origin.x, pt.y - origin.y
    if math.hypot(dx, dy) <= EPS_KM:
        return 0
    phi = normalize_angle(math.atan2(dy, dx))
    k = int(math.floor(phi / (TWO_PI / sector_count)))
    return min(k, sector_count - 1)


def partition_sectors(
    nodes: Mapping[NodeId, CartesianPoint],
    hull: Optional[ConvexHull],
    S: int,
    origin: Optional[CartesianPoint] = None,
) -> SectorPartition:
    """Split nodes into ``S`` half-open wedges around the hull centroid.

    ``origin`` overrides the centroid; the single-sector fallback for
    degenerate layouts passes one explicitly with ``hull=None``.
    """
    if S < 1:
        raise ValueError("sector count must be >= 1")
    if origin is None:
        if hull is None:
            raise ValueError("origin required when no hull is given")
        origin = hull.centroid
    buckets: list[set] = [set() for _ in range(S)]
    for nid, pt in nodes.items():
        buckets[sector_index(pt, origin, S)].add(nid)
    sectors = tuple(Sector(k, frozenset(b)) for k, b in enumerate(buckets))
    return SectorPartition(S, TWO_PI / S, origin, sectors)


class Direction(str, enum.Enum):
    CW = "CW"
    CCW = "CCW"
    NONE = "NONE"


def angular_steps(src_sector: int, dst_sector: int, S: int) -> tuple[int, int]:
    """(counterclockwise, clockwise) step counts between two sectors."""
    return (dst_sector - src_sector) % S, (src_sector - dst_sector) % S


def angular_direction(src_sector: int, dst_sector: int, S: int) -> Direction:
    if not (0 <= src_sector < S and 0 <= dst_sector < S):
        raise ValueError("sector index out of range")
    if src_sector == dst_sector:
        return Direction.NONE
    d_ccw, d_cw = angular_steps(src_sector, dst_sector, S)
    return Direction.CW if d_cw < d_ccw else Direction.CCW
