"""Mesh construction and churn.

Every transition returns a new :class:`MeshTopology`. Hull and partition
are reused whenever the churn rule says they survive; everything derived
from the graph (edges, MST, leaders, roles, link probabilities) is
re-derived on each transition.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional

from . import protocol
from .geometry import (
    DegenerateInput,
    PolarPosition,
    CartesianPoint,
    ConvexHull,
    Sector,
    SectorPartition,
    compute_convex_hull,
    partition_sectors,
    sector_angle,
    sector_index,
)
from .model import (
    BalloonNode,
    DuplicateNode,
    IsolatedNode,
    LinkEdge,
    MeshParams,
    MeshTopology,
    UnknownNode,
    edge_key,
    gap_distance,
)
from .routing import LinkProbabilityParams, link_failure_probability

log = logging.getLogger(__name__)


def power_density(transmit_power: float, distance: float, d_min: float) -> float:
    """Inverse-square received density, clamped at ``d_min``."""
    if transmit_power <= 0 or distance < 0 or d_min <= 0:
        raise ValueError("need transmit_power > 0, distance >= 0, d_min > 0")
    return transmit_power / max(distance, d_min) ** 2


def discover_neighbors(
    node: str,
    nodes: Mapping[str, BalloonNode],
    radio_range: float,
    density_threshold: float,
    d_min: float = 0.1,
) -> set[str]:
    """Nodes in range whose signal at ``node`` clears the threshold.

    The strongest in-range transmitter is always kept, even below the
    threshold. Raises :class:`IsolatedNode` when nothing is in range.
    """
    if node not in nodes:
        raise UnknownNode(node)
    me = nodes[node]
    found: set[str] = set()
    strongest: Optional[tuple[float, str]] = None
    for oid, other in nodes.items():
        if oid == node:
            continue
        d = me.point.distance(other.point)
        if d > radio_range:
            continue
        rho = power_density(other.signal_power, d, d_min)
        if rho >= density_threshold:
            found.add(oid)
        # ties in density go to the smaller id
        if strongest is None or rho > strongest[0] or (rho == strongest[0] and oid < strongest[1]):
            strongest = (rho, oid)
    if strongest is None:
        raise IsolatedNode(node)
    found.add(strongest[1])
    return found


def _find(parent: dict, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def minimum_spanning_tree(nodes: Iterable[str], weighted_pairs: Mapping[tuple[str, str], float]) -> frozenset:
    """Kruskal; equal weights resolve to the smaller id pair. Forest if disconnected."""
    parent = {n: n for n in nodes}
    chosen = set()
    for (a, b), _w in sorted(weighted_pairs.items(), key=lambda kv: (kv[1], kv[0])):
        ra, rb = _find(parent, a), _find(parent, b)
        if ra != rb:
            parent[ra] = rb
            chosen.add((a, b))
    return frozenset(chosen)


def _with_gap_flags(nodes: Mapping[str, BalloonNode], params: MeshParams) -> dict[str, BalloonNode]:
    out = {}
    for nid in sorted(nodes):
        n = nodes[nid]
        reach = gap_distance(n, params) <= params.gap_range
        out[nid] = n if n.reachable_from_gap == reach else replace(n, reachable_from_gap=reach)
    return out


def _fresh_layout(points: Mapping[str, CartesianPoint], params: MeshParams):
    """Hull and unlabelled partition from scratch; hull is None when degenerate."""
    try:
        hull = compute_convex_hull(points)
    except DegenerateInput:
        cx = sum(p.x for p in points.values()) / len(points)
        cy = sum(p.y for p in points.values()) / len(points)
        return None, partition_sectors(points, None, 1, origin=CartesianPoint(cx, cy))
    S, _ = sector_angle(len(points), len(hull.vertices), params.t_max, params.h_max)
    return hull, partition_sectors(points, hull, S)


def _derive(
    nodes: Mapping[str, BalloonNode],
    params: MeshParams,
    hull: Optional[ConvexHull],
    partition: SectorPartition,
) -> MeshTopology:
    nodes = _with_gap_flags(nodes, params)
    pairs: dict[tuple[str, str], float] = {}
    isolated = set()
    for nid in nodes:
        try:
            found = discover_neighbors(nid, nodes, params.radio_range, params.density_threshold, params.d_min)
        except IsolatedNode:
            isolated.add(nid)
            continue
        for other in found:
            k = edge_key(nid, other)
            if k not in pairs:
                pairs[k] = nodes[k[0]].point.distance(nodes[k[1]].point)
    mst = minimum_spanning_tree(nodes, pairs)

    adjacency: dict[str, set] = {nid: set() for nid in nodes}
    for a, b in pairs:
        adjacency[a].add(b)
        adjacency[b].add(a)
    adjacency = {k: frozenset(v) for k, v in adjacency.items()}

    points = {nid: n.point for nid, n in nodes.items()}
    hull_ids = hull.vertex_set if hull is not None else None
    partition = protocol.elect_all_leaders(partition, points, adjacency, hull_ids, params.max_hop)
    nodes = protocol.assign_roles_and_priorities(nodes, partition, hull_ids or frozenset())

    lp = LinkProbabilityParams.from_mesh(params)
    edges = {
        k: LinkEdge(k[0], k[1], d, link_failure_probability(nodes[k[0]], nodes[k[1]], lp))
        for k, d in sorted(pairs.items())
    }
    mean_degree = 2.0 * len(edges) / len(nodes)
    return MeshTopology(
        nodes=nodes,
        edges=edges,
        hull=hull,
        partition=partition,
        mst_edges=mst,
        subcritical=mean_degree < params.percolation_degree_threshold,
        params=params,
        isolated=frozenset(isolated),
        adjacency=adjacency,
    )


def build_mesh(nodes: Iterable[BalloonNode], params: Optional[MeshParams] = None) -> MeshTopology:
    """Build the full mesh state from scratch.

    Fewer than three nodes, or a collinear layout, give ``hull=None`` and a
    single sector led by the highest-degree node.
    """
    params = params or MeshParams()
    table: dict[str, BalloonNode] = {}
    for n in nodes:
        if n.id in table:
            raise DuplicateNode(n.id)
        table[n.id] = n
    if not table:
        raise ValueError("build_mesh needs at least one node")
    hull, partition = _fresh_layout({nid: n.point for nid, n in table.items()}, params)
    return _derive(table, params, hull, partition)


@dataclass
class ReconfigReport:
    """What a churn step did. ``notified`` lists the sector leaders told about it."""

    case: str
    hull_recomputed: bool
    sector_reconfig: bool
    notified: tuple[str, ...] = field(default_factory=tuple)

    @property
    def control_messages(self) -> int:
        return len(self.notified)


def _changed_leaders(old: SectorPartition, new: SectorPartition) -> tuple[str, ...]:
    """Leaders of sectors whose members or leader differ between two partitions."""
    if old.sector_count != new.sector_count:
        return tuple(sorted(set(new.leaders().values())))
    out = set()
    for a, b in zip(old.sectors, new.sectors):
        if (a.members != b.members or a.leader != b.leader) and b.leader is not None:
            out.add(b.leader)
    return tuple(sorted(out))


def _full(nodes: dict[str, BalloonNode], params: MeshParams, case: str):
    hull, partition = _fresh_layout({nid: n.point for nid, n in nodes.items()}, params)
    topo = _derive(nodes, params, hull, partition)
    leaders = tuple(sorted(set(topo.partition.leaders().values())))
    return topo, ReconfigReport(case, True, True, leaders)


def _regroup(topo: MeshTopology, nodes: dict[str, BalloonNode], case: str):
    """Keep the hull; move members between sectors or re-sector if S changes."""
    params = topo.params
    hull = topo.hull
    old = topo.partition
    S, _ = sector_angle(len(nodes), len(hull.vertices), params.t_max, params.h_max)
    points = {nid: n.point for nid, n in nodes.items()}
    if S != old.sector_count:
        partition = partition_sectors(points, hull, S)
        new_topo = _derive(nodes, params, hull, partition)
        leaders = tuple(sorted(set(new_topo.partition.leaders().values())))
        return new_topo, ReconfigReport(case + "_resector", False, True, leaders)
    buckets = [set(s.members & points.keys()) for s in old.sectors]
    for nid, pt in points.items():
        if nid in topo.nodes and topo.nodes[nid].position == nodes[nid].position:
            continue
        for b in buckets:
            b.discard(nid)
        buckets[sector_index(pt, old.origin, S)].add(nid)
    partition = replace(old, sectors=tuple(Sector(k, frozenset(b)) for k, b in enumerate(buckets)))
    new_topo = _derive(nodes, params, hull, partition)
    return new_topo, ReconfigReport(case, False, False, _changed_leaders(old, new_topo.partition))


def add_node(topology: MeshTopology, node: BalloonNode) -> tuple[MeshTopology, ReconfigReport]:
    if node.id in topology.nodes:
        raise DuplicateNode(node.id)
    nodes = dict(topology.nodes)
    nodes[node.id] = node
    hull = topology.hull
    if hull is not None and hull.classify(node.point) == "inside":
        return _regroup(topology, nodes, "interior_add")
    log.debug("add %s outside hull: full reconfiguration", node.id)
    return _full(nodes, topology.params, "exterior_add")


def remove_node(topology: MeshTopology, node_id: str) -> tuple[MeshTopology, ReconfigReport]:
    if node_id not in topology.nodes:
        raise UnknownNode(node_id)
    nodes = {k: v for k, v in topology.nodes.items() if k != node_id}
    if not nodes:
        raise ValueError("cannot remove the last node")
    if topology.hull is None or node_id in topology.hull.vertex_set:
        return _full(nodes, topology.params, "hull_remove")
    return _regroup(topology, nodes, "interior_remove")


def drift_node(
    topology: MeshTopology, node_id: str, position: PolarPosition
) -> tuple[MeshTopology, ReconfigReport]:
    """Move a node; leaving the hull interior, or moving a hull vertex, rebuilds."""
    if node_id not in topology.nodes:
        raise UnknownNode(node_id)
    moved = replace(topology.nodes[node_id], position=position)
    nodes = dict(topology.nodes)
    nodes[node_id] = moved
    hull = topology.hull
    if hull is None or node_id in hull.vertex_set or hull.classify(moved.point) != "inside":
        return _full(nodes, topology.params, "drift_full")
    return _regroup(topology, nodes, "interior_drift")
