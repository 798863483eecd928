"""Sector-partitioned, hull-anchored balloon mesh: library and simulator."""

from .geometry import (
    CartesianPoint,
    ConvexHull,
    DegenerateInput,
    Direction,
    PolarPosition,
    Sector,
    SectorPartition,
    angular_direction,
    compute_convex_hull,
    partition_sectors,
    sector_angle,
    to_cartesian,
)
from .model import BalloonNode, DuplicateNode, IsolatedNode, LinkEdge, MeshParams, MeshTopology, Role, UnknownNode
from .protocol import gather_destination_info
from .routing import NoRoute, NotAPath, RouteResult, best_path, link_failure_probability, min_hop_path, path_reliability
from .simulation import Mode, MetricsReport, ScenarioConfig, run_baseline, run_scenario
from .topology import ReconfigReport, add_node, build_mesh, drift_node, power_density, remove_node

__version__ = "0.1.0"

__all__ = [
    "BalloonNode",
    "CartesianPoint",
    "ConvexHull",
    "DegenerateInput",
    "Direction",
    "DuplicateNode",
    "IsolatedNode",
    "LinkEdge",
    "MeshParams",
    "MeshTopology",
    "MetricsReport",
    "Mode",
    "NoRoute",
    "NotAPath",
    "PolarPosition",
    "ReconfigReport",
    "Role",
    "RouteResult",
    "ScenarioConfig",
    "Sector",
    "SectorPartition",
    "UnknownNode",
    "add_node",
    "angular_direction",
    "best_path",
    "build_mesh",
    "compute_convex_hull",
    "drift_node",
    "gather_destination_info",
    "link_failure_probability",
    "min_hop_path",
    "partition_sectors",
    "path_reliability",
    "power_density",
    "remove_node",
    "run_baseline",
    "run_scenario",
    "sector_angle",
    "to_cartesian",
]
