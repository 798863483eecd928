import math
import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from loonmesh.geometry import PolarPosition
from loonmesh.model import BalloonNode

ACCEPTANCE_LINES: list[str] = []


def node(nid, x, y, **kw):
    """Node at Cartesian (x, y) km."""
    alt = kw.pop("altitude", 20.0)
    return BalloonNode(id=nid, position=PolarPosition.from_cartesian(x, y, alt), **kw)


def random_nodes(rng: random.Random, n: int, radius: float = 60.0, prefix: str = "n", start: int = 0):
    out = []
    for i in range(start, start + n):
        r = radius * math.sqrt(rng.random())
        a = rng.uniform(0, 2 * math.pi)
        max_load = rng.randint(10, 100)
        out.append(
            BalloonNode(
                id=f"{prefix}{i:03d}",
                position=PolarPosition(r, a, rng.uniform(18, 22)),
                load=rng.randint(0, max_load),
                max_load=max_load,
                signal_power=rng.uniform(0.8, 1.2),
            )
        )
    return out


@pytest.fixture
def acceptance_log():
    def record(name: str, ok: bool, detail: str = ""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" -- {detail}" if detail else ""))

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def graph_topology(edge_p: dict, roles: dict | None = None, params=None):
    """MeshTopology over an explicit edge list with hand-set failure probabilities.

    Node geometry is irrelevant here, so every node sits at the origin and
    the partition is a single sector.
    """
    from dataclasses import replace

    from loonmesh.geometry import CartesianPoint, Sector, SectorPartition
    from loonmesh.model import ROLE_LEVEL, LinkEdge, MeshParams, MeshTopology, Role, edge_key

    roles = roles or {}
    ids = sorted({i for e in edge_p for i in e} | set(roles))
    nodes = {}
    for i in ids:
        role = roles.get(i, Role.ORDINARY)
        nodes[i] = replace(node(i, 0.0, 0.0), role=role, priority=ROLE_LEVEL[role])
    edges = {edge_key(a, b): LinkEdge(a, b, 1.0, p) for (a, b), p in edge_p.items()}
    part = SectorPartition(1, 2 * math.pi, CartesianPoint(0, 0), (Sector(0, frozenset(ids), ids[0]),))
    return MeshTopology(nodes, edges, None, part, frozenset(), False, params or MeshParams())
