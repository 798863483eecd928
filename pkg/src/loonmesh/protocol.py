"""Dynamic core-based mesh roles: sector leaders, passive hull nodes.

Election is deterministic. Sectors that contain hull vertices are elected
first; sectors with no hull vertex then estimate a target radius from the
neighbouring sectors' leaders.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from .geometry import (
    CartesianPoint,
    Direction,
    Sector,
    SectorPartition,
    angular_direction,
    angular_steps,
)
from .model import ROLE_LEVEL, BalloonNode, MeshError, Role


class EmptySector(MeshError):
    pass


class UnknownDestination(MeshError):
    pass


def hop_distances(adjacency: Mapping[str, frozenset], source: str) -> dict[str, int]:
    """Unweighted BFS distances from ``source``; unreachable nodes are absent."""
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _radius(pt: CartesianPoint, origin: CartesianPoint) -> float:
    return pt.distance(origin)


def highest_degree(members, adjacency: Mapping[str, frozenset]) -> str:
    return min(members, key=lambda m: (-len(adjacency[m]), m))


def leader_candidates(
    sector: Sector,
    adjacency: Mapping[str, frozenset],
    hull_vertices: frozenset,
    max_hop: int,
) -> set[str]:
    """Non-hull members within ``max_hop`` hops of every hull vertex in the sector."""
    boundary = sector.members & hull_vertices
    reach = [hop_distances(adjacency, h) for h in sorted(boundary)]
    return {
        m
        for m in sector.members - hull_vertices
        if all(d.get(m, max_hop + 1) <= max_hop for d in reach)
    }


def elect_leader(
    sector: Sector,
    points: Mapping[str, CartesianPoint],
    origin: CartesianPoint,
    adjacency: Mapping[str, frozenset],
    hull_vertices: frozenset,
    max_hop: int = 2,
) -> str:
    """Pick the sector head, preferring the outermost qualifying candidate.

    Falls back to the highest-degree member when no non-hull node is close
    enough to all of the sector's hull vertices.
    """
    if not sector.members:
        raise EmptySector(f"sector {sector.index} has no members")
    cands = leader_candidates(sector, adjacency, hull_vertices, max_hop)
    if not cands:
        return highest_degree(sector.members, adjacency)
    return min(cands, key=lambda m: (-_radius(points[m], origin), m))


def radius_estimate(
    sector_index: int,
    sector_count: int,
    known_leaders: Mapping[int, str],
    points: Mapping[str, CartesianPoint],
    origin: CartesianPoint,
) -> Optional[float]:
    """Mean leader radius of the adjacent sectors, else of all known leaders."""
    adjacent = {(sector_index - 1) % sector_count, (sector_index + 1) % sector_count} - {sector_index}
    radii = [_radius(points[known_leaders[k]], origin) for k in sorted(adjacent) if k in known_leaders]
    if not radii:
        radii = [_radius(points[known_leaders[k]], origin) for k in sorted(known_leaders)]
    if not radii:
        return None
    return sum(radii) / len(radii)


def elect_leader_no_boundary(
    sector: Sector,
    partition: SectorPartition,
    points: Mapping[str, CartesianPoint],
    known_leaders: Optional[Mapping[int, str]] = None,
) -> str:
    """Leader for a sector without hull vertices.

    The member whose radius is closest to the neighbouring leaders' mean
    radius wins. ``known_leaders`` defaults to the leaders already on the
    partition.
    """
    if not sector.members:
        raise EmptySector(f"sector {sector.index} has no members")
    if known_leaders is None:
        known_leaders = partition.leaders()
    origin = partition.origin
    target = radius_estimate(sector.index, partition.sector_count, known_leaders, points, origin)
    if target is None:
        # no leader anywhere to learn from: aim for the sector's mean radius
        target = sum(_radius(points[m], origin) for m in sector.members) / len(sector.members)
    return min(sector.members, key=lambda m: (abs(_radius(points[m], origin) - target), m))


def elect_all_leaders(
    partition: SectorPartition,
    points: Mapping[str, CartesianPoint],
    adjacency: Mapping[str, frozenset],
    hull_vertices: Optional[frozenset],
    max_hop: int = 2,
) -> SectorPartition:
    """Return ``partition`` with a leader set on every non-empty sector.

    ``hull_vertices`` of ``None`` means the layout is degenerate: the lone
    sector gets its highest-degree node.
    """
    leaders: dict[int, str] = {}
    if hull_vertices is None:
        for s in partition.sectors:
            if s.members:
                leaders[s.index] = highest_degree(s.members, adjacency)
    else:
        for s in partition.sectors:
            if s.members & hull_vertices:
                leaders[s.index] = elect_leader(s, points, partition.origin, adjacency, hull_vertices, max_hop)
        anchored = dict(leaders)
        for s in partition.sectors:
            if s.members and s.index not in leaders:
                leaders[s.index] = elect_leader_no_boundary(s, partition, points, anchored)
    sectors = tuple(replace(s, leader=leaders.get(s.index)) for s in partition.sectors)
    return replace(partition, sectors=sectors)


def assign_roles_and_priorities(
    nodes: Mapping[str, BalloonNode],
    partition: SectorPartition,
    hull_vertices: frozenset,
) -> dict[str, BalloonNode]:
    leaders = set(partition.leaders().values())
    out = {}
    for nid, node in nodes.items():
        if nid in leaders:
            role = Role.CORE_ACTIVE
        elif nid in hull_vertices:
            role = Role.PASSIVE
        else:
            role = Role.ORDINARY
        if node.role is not role or node.priority != ROLE_LEVEL[role]:
            node = replace(node, role=role, priority=ROLE_LEVEL[role])
        out[nid] = node
    return out


def flatten_roles(nodes: Mapping[str, BalloonNode]) -> dict[str, BalloonNode]:
    """Every node Ordinary at level 1, as in the all-active baseline."""
    return {
        nid: n if n.role is Role.ORDINARY and n.priority == 1 else replace(n, role=Role.ORDINARY, priority=1)
        for nid, n in nodes.items()
    }


@dataclass(frozen=True)
class MemberEntry:
    position: CartesianPoint
    sector: int


@dataclass(frozen=True)
class LeaderDirectory:
    sector_leaders: dict[int, str]
    tables: dict[str, dict[str, MemberEntry]] = field(default_factory=dict)

    def leader_of(self, sector: int) -> Optional[str]:
        return self.sector_leaders.get(sector)

    def lookup(self, leader: str, dst: str) -> Optional[MemberEntry]:
        return self.tables.get(leader, {}).get(dst)


def build_directory(partition: SectorPartition, points: Mapping[str, CartesianPoint]) -> LeaderDirectory:
    leaders = partition.leaders()
    tables = {}
    for s in partition.sectors:
        if s.leader is None:
            continue
        tables[s.leader] = {m: MemberEntry(points[m], s.index) for m in sorted(s.members)}
    return LeaderDirectory(leaders, tables)


@dataclass(frozen=True)
class InfoGatheringTrace:
    """One destination lookup.

    ``sector_path`` lists every sector the query crosses; ``control_hops``
    is its length minus one. Empty sectors have no leader and so appear in
    ``sector_path`` but not in ``query_path``.
    """

    control_hops: int
    query_path: tuple[str, ...]
    reply_path: tuple[str, ...]
    sector_path: tuple[int, ...]
    direction: Direction

    @property
    def messages(self) -> int:
        return len(self.query_path) - 1 + len(self.reply_path) - 1


def _dedupe(seq):
    out = []
    for x in seq:
        if not out or out[-1] != x:
            out.append(x)
    return tuple(out)


def gather_destination_info(
    src: str,
    dst: str,
    directory: LeaderDirectory,
    partition: SectorPartition,
) -> InfoGatheringTrace:
    """Ask the local leader for ``dst``; forward leader to leader around the ring.

    The query walks the angularly shorter way (ties counterclockwise) until a
    leader whose table holds ``dst`` answers; the reply retraces the chain.
    """
    membership = partition.membership()
    if src not in membership:
        raise UnknownDestination(f"source {src} is in no sector")
    s_src = membership[src]
    S = partition.sector_count
    owner = None
    for leader, table in directory.tables.items():
        if dst in table:
            owner = table[dst].sector
            break
    if owner is None:
        raise UnknownDestination(f"{dst} is in no leader's member table")
    direction = angular_direction(s_src, owner, S)
    d_ccw, d_cw = angular_steps(s_src, owner, S)
    step, hops = (1, d_ccw) if direction is not Direction.CW else (-1, d_cw)
    if direction is Direction.NONE:
        hops = 0
    sector_path = tuple((s_src + step * i) % S for i in range(hops + 1))
    chain = [src]
    chain.extend(directory.sector_leaders[k] for k in sector_path if k in directory.sector_leaders)
    query = _dedupe(chain)
    if directory.lookup(query[-1], dst) is None:
        raise UnknownDestination(f"leader {query[-1]} has no entry for {dst}")
    return InfoGatheringTrace(hops, query, tuple(reversed(query)), sector_path, direction)
