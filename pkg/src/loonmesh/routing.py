"""Link failure model and most-reliable-path selection.

Path search runs Dijkstra on the additive weight ``-ln(1 - p)`` so that the
shortest path is the one maximising the product of effective link
probabilities. Passive nodes may originate or terminate a route but never
relay.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .model import BalloonNode, MeshError, MeshTopology, Role, horizontal_distance


class NoRoute(MeshError):
    pass


class NotAPath(MeshError, ValueError):
    pass


@dataclass(frozen=True)
class LinkProbabilityParams:
    alpha: float = 0.5
    beta: float = 0.3
    gamma: float = 0.2
    p_floor: float = 0.01
    p_ceil: float = 0.99
    radio_range: float = 40.0

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("weights must be non-negative")
        if abs(self.alpha + self.beta + self.gamma - 1.0) > 1e-12:
            raise ValueError("alpha + beta + gamma must equal 1")
        if not 0.0 < self.p_floor < self.p_ceil < 1.0:
            raise ValueError("require 0 < p_floor < p_ceil < 1")
        if self.radio_range <= 0:
            raise ValueError("radio_range must be > 0")

    @classmethod
    def from_mesh(cls, params) -> "LinkProbabilityParams":
        return cls(params.alpha, params.beta, params.gamma, params.p_floor, params.p_ceil, params.radio_range)


@dataclass(frozen=True)
class RouteResult:
    path: tuple[str, ...]
    reliability: float

    @property
    def hop_count(self) -> int:
        return len(self.path) - 1


def link_failure_probability(u: BalloonNode, v: BalloonNode, params: LinkProbabilityParams) -> float:
    """Failure probability of the u-v link.

    A convex blend of normalised squared distance, mean load fraction and
    mean priority level, clamped to ``[p_floor, p_ceil]``.
    """
    if u.id == v.id:
        raise ValueError("link endpoints must differ")
    reach = min(1.0, horizontal_distance(u, v) / params.radio_range)
    raw = (
        params.alpha * reach**2
        + params.beta * (u.load_fraction + v.load_fraction) / 2.0
        + params.gamma * (u.priority + v.priority) / 4.0
    )
    return min(max(raw, params.p_floor), params.p_ceil)


def link_weight(p: float) -> float:
    return -math.log1p(-p)


def path_reliability(topology: MeshTopology, path: Sequence[str]) -> float:
    if len(path) < 2:
        raise NotAPath("a path needs at least two nodes")
    r = 1.0
    for a, b in zip(path, path[1:]):
        e = topology.edge(a, b)
        if e is None:
            raise NotAPath(f"no edge between {a} and {b}")
        r *= e.effective_probability
    return r


def _can_relay(topology: MeshTopology, nid: str, exclude_passive: bool) -> bool:
    return not (exclude_passive and topology.nodes[nid].role is Role.PASSIVE)


def _check_endpoints(topology: MeshTopology, src: str, dst: str) -> None:
    for nid in (src, dst):
        if nid not in topology.nodes:
            raise KeyError(nid)
    if src == dst:
        raise ValueError("src and dst must differ")


def best_path(topology: MeshTopology, src: str, dst: str, exclude_passive: bool = True) -> RouteResult:
    """Most reliable admissible path.

    Labels are ``(weight, hops, path)`` tuples so ties on weight fall to
    fewer hops and then to the lexicographically smallest id sequence.
    """
    _check_endpoints(topology, src, dst)
    best: dict[str, tuple] = {src: (0.0, 0, (src,))}
    heap = [(0.0, 0, (src,))]
    done: set[str] = set()
    while heap:
        label = heapq.heappop(heap)
        w, hops, path = label
        node = path[-1]
        if node in done or best.get(node) != label:
            continue
        done.add(node)
        if node == dst:
            return RouteResult(path, path_reliability(topology, path))
        if node != src and not _can_relay(topology, node, exclude_passive):
            continue
        for nb in sorted(topology.neighbors(node)):
            if nb in done:
                continue
            cand = (w + link_weight(topology.edge(node, nb).failure_probability), hops + 1, path + (nb,))
            if nb not in best or cand < best[nb]:
                best[nb] = cand
                heapq.heappush(heap, cand)
    raise NoRoute(f"no admissible route from {src} to {dst}")


def min_hop_path(topology: MeshTopology, src: str, dst: str, exclude_passive: bool = True) -> RouteResult:
    """Fewest-hop admissible path; ties go to the smallest id sequence.

    BFS visiting neighbours in sorted order yields exactly that path.
    """
    _check_endpoints(topology, src, dst)
    parent: dict[str, str | None] = {src: None}
    queue = deque([src])
    while queue:
        node = queue.popleft()
        if node == dst:
            break
        if node != src and not _can_relay(topology, node, exclude_passive):
            continue
        for nb in sorted(topology.neighbors(node)):
            if nb not in parent:
                parent[nb] = node
                queue.append(nb)
    if dst not in parent:
        raise NoRoute(f"no admissible route from {src} to {dst}")
    path = [dst]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()
    return RouteResult(tuple(path), path_reliability(topology, path))
