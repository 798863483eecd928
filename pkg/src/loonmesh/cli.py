"""``loonmesh`` command line: run, hull, route, validate, reference.

Exit codes: 0 ok, 2 unreadable file, 3 schema/validation failure,
4 runtime simulation error, 5 degenerate hull, 6 no route, 7 bad node id.
Machine-readable output goes to stdout as JSON; diagnostics go to stderr,
with verbosity from ``LOONMESH_LOG`` (error, info, debug).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import protocol
from .fileio import ScenarioError, dump_scenario, events_csv, load_scenario, metrics_json, round_sig
from .routing import NoRoute, best_path
from .simulation import InvalidScenario, Mode, SimulationError, U64_MAX, reference_scenario, run_mode, validate_scenario
from .topology import build_mesh

log = logging.getLogger("loonmesh")

EXIT_OK = 0
EXIT_IO = 2
EXIT_SCHEMA = 3
EXIT_RUNTIME = 4
EXIT_DEGENERATE = 5
EXIT_NO_ROUTE = 6
EXIT_BAD_ID = 7


class CommandError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _setup_logging() -> None:
    level = os.environ.get("LOONMESH_LOG", "error").upper()
    if level not in ("ERROR", "INFO", "DEBUG"):
        level = "ERROR"
    logging.basicConfig(level=getattr(logging, level), stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _load(path: str, check: bool = True):
    try:
        config = load_scenario(path)
    except OSError as exc:
        raise CommandError(EXIT_IO, f"cannot read scenario {path}: {exc.strerror or exc}")
    except UnicodeDecodeError as exc:
        raise CommandError(EXIT_IO, f"cannot decode scenario {path}: {exc}")
    except ScenarioError as exc:
        raise CommandError(EXIT_SCHEMA, f"schema error at {exc.path or '<root>'}: {exc}")
    if check:
        try:
            validate_scenario(config)
        except InvalidScenario as exc:
            where = f"events.{exc.event_index}" if exc.event_index is not None else "<scenario>"
            raise CommandError(EXIT_SCHEMA, f"validation error at {where}: {exc}")
    return config


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(round_sig(obj), indent=2) + "\n")


def cmd_validate(args) -> int:
    config = _load(args.scenario)
    _emit({"valid": True, "nodes": len(config.nodes), "events": len(config.events), "seed": config.rng_seed})
    return EXIT_OK


def cmd_run(args) -> int:
    config = _load(args.scenario)
    if args.seed is not None:
        if not 0 <= args.seed <= U64_MAX:
            raise CommandError(EXIT_SCHEMA, "--seed must be an unsigned 64-bit integer")
        config = type(config)(config.nodes, config.params, config.events, args.seed)
    try:
        report = run_mode(config, args.baseline)
    except SimulationError as exc:
        raise CommandError(EXIT_RUNTIME, f"simulation failed at event {exc.event_index}: {exc.cause}")
    # both outputs are rendered before anything touches the disk
    text = metrics_json(report, config)
    csv_text = events_csv(report) if args.events_csv else None
    out = Path(args.out)
    try:
        out.write_text(text, encoding="utf-8")
        if csv_text is not None:
            Path(args.events_csv).write_text(csv_text, encoding="utf-8")
    except OSError as exc:
        out.unlink(missing_ok=True)
        raise CommandError(EXIT_IO, f"cannot write output: {exc}")
    pdr = "n/a" if report.pdr is None else f"{report.pdr:.4f}"
    hops = "n/a" if report.mean_hops is None else f"{report.mean_hops:.3f}"
    print(f"mode={report.mode} pdr={pdr} control_messages={report.control_messages} mean_hops={hops}")
    return EXIT_OK


def cmd_hull(args) -> int:
    config = _load(args.scenario)
    topo = build_mesh(config.nodes, config.params)
    if topo.hull is None:
        raise CommandError(EXIT_DEGENERATE, f"degenerate layout: {len(topo.nodes)} node(s) cannot form a hull")
    part = topo.partition
    _emit(
        {
            "hull": list(topo.hull.vertices),
            "centroid": [topo.hull.centroid.x, topo.hull.centroid.y],
            "sector_count": part.sector_count,
            "sector_angle": part.sector_angle,
            "sectors": [
                {"index": s.index, "members": sorted(s.members), "leader": s.leader} for s in part.sectors
            ],
        }
    )
    return EXIT_OK


def cmd_route(args) -> int:
    config = _load(args.scenario)
    ids = {n.id for n in config.nodes}
    for nid in (args.src, args.dst):
        if nid not in ids:
            raise CommandError(EXIT_BAD_ID, f"unknown node id {nid!r}")
    if args.src == args.dst:
        raise CommandError(EXIT_BAD_ID, "src and dst must differ")
    topo = build_mesh(config.nodes, config.params)
    try:
        route = best_path(topo, args.src, args.dst)
    except NoRoute as exc:
        raise CommandError(EXIT_NO_ROUTE, str(exc))
    directory = protocol.build_directory(topo.partition, topo.points())
    trace = protocol.gather_destination_info(args.src, args.dst, directory, topo.partition)
    _emit(
        {
            "path": list(route.path),
            "reliability": route.reliability,
            "hop_count": route.hop_count,
            "control_hops": trace.control_hops,
        }
    )
    return EXIT_OK


def cmd_reference(args) -> int:
    if not 0 <= args.seed <= U64_MAX:
        raise CommandError(EXIT_SCHEMA, "--seed must be an unsigned 64-bit integer")
    dump_scenario(reference_scenario(args.seed, n_nodes=args.nodes, n_sends=args.sends), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="loonmesh", description="Balloon mesh simulator")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write a metrics file")
    run.add_argument("--scenario", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--baseline", choices=[Mode.ALL_ACTIVE.value, Mode.MIN_HOP.value])
    run.add_argument("--out", required=True)
    run.add_argument("--events-csv", help="also write the per-event log as CSV")
    run.set_defaults(func=cmd_run)

    hull = sub.add_parser("hull", help="print hull, sectors and leaders as JSON")
    hull.add_argument("--scenario", required=True)
    hull.set_defaults(func=cmd_hull)

    route = sub.add_parser("route", help="print the most reliable route between two nodes")
    route.add_argument("--scenario", required=True)
    route.add_argument("--src", required=True)
    route.add_argument("--dst", required=True)
    route.set_defaults(func=cmd_route)

    val = sub.add_parser("validate", help="check a scenario file")
    val.add_argument("--scenario", required=True)
    val.set_defaults(func=cmd_validate)

    ref = sub.add_parser("reference", help="write a reference-family scenario")
    ref.add_argument("--seed", type=int, required=True)
    ref.add_argument("--nodes", type=int, default=30)
    ref.add_argument("--sends", type=int, default=100)
    ref.add_argument("--out", required=True)
    ref.set_defaults(func=cmd_reference)
    return p


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"loonmesh: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
