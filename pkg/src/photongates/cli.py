"""Command-line front end.

Exit codes: 0 success, 1 verification failed, 2 usage or gate-spec error,
3 discovery exhausted, 4 I/O or schema error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Sequence

from . import catalog
from .blueprint import export_dot, graph_to_blueprint
from .discovery import DiscoveryError, NoSolutionFound, OptimizerConfig, discover
from .gates import GateError, GateSpecParseError, LayoutError, parse_gate_spec
from .graph import GraphError, graph_from_json, graph_to_json
from .matchings import graph_state
from .objective import DEFAULT_TOL, verify_gate

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_EXHAUSTED, EXIT_IO = 0, 1, 2, 3, 4

DISCOVER_DEFAULTS: dict[str, Any] = {
    "ancillas": 0, "seed": 0, "restarts": 50, "steps": 2000, "real_only": False,
    "snap": False, "forbid": [], "method": "gd", "herald_only": False,
    "loss": "fidelity", "search_threshold": 1e-3, "polish_threshold": 1e-6,
    "init_scale": 1.0, "rate_weight": 0.0, "min_rate": 0.0, "output": None, "trace": None,
}
VERIFY_DEFAULTS: dict[str, Any] = {"tol": DEFAULT_TOL, "report": None}


class UsageError(Exception):
    pass


def _err(msg: str) -> None:
    print(f"photongates: {msg}", file=sys.stderr)


def _read_graph(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return graph_from_json(text)


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _parse_forbid(items: Sequence[str] | Sequence[Sequence[int]]) -> tuple[tuple[int, int], ...]:
    pairs = []
    for item in items:
        if isinstance(item, str):
            parts = item.split("-")
            if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
                raise UsageError(f"--forbid expects a-b vertex pairs, got {item!r}")
            pairs.append((int(parts[0]), int(parts[1])))
        else:
            a, b = item
            pairs.append((int(a), int(b)))
    return tuple(pairs)


def _merge(args: argparse.Namespace, defaults: dict[str, Any]) -> dict[str, Any]:
    """Flags win over the --config file, which wins over built-in defaults."""
    file_cfg: dict[str, Any] = {}
    if getattr(args, "config", None):
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(file_cfg) - set(defaults) - {"gate", "graph"}
        if unknown:
            raise UsageError(f"unknown config keys {sorted(unknown)}")
    merged = {}
    for key, default in defaults.items():
        val = getattr(args, key, None)
        merged[key] = val if val is not None else file_cfg.get(key, default)
    for key in ("gate", "graph"):
        if getattr(args, key, None) is None and key in file_cfg:
            setattr(args, key, file_cfg[key])
    return merged


def cmd_discover(args: argparse.Namespace) -> int:
    opts = _merge(args, DISCOVER_DEFAULTS)
    if args.gate is None:
        raise UsageError("discover needs a gate spec")
    spec = parse_gate_spec(args.gate)
    cfg = OptimizerConfig(
        loss_kind=opts["loss"], search_threshold=opts["search_threshold"],
        polish_threshold=opts["polish_threshold"], max_restarts=opts["restarts"],
        steps=opts["steps"], init_scale=opts["init_scale"], real_only=opts["real_only"],
        seed=opts["seed"], snap_weights=opts["snap"], method=opts["method"],
        forbid=_parse_forbid(opts["forbid"]), herald_only=opts["herald_only"],
        rate_weight=opts["rate_weight"], min_rate=opts["min_rate"])
    if 2 * spec.arity + opts["ancillas"] < 2 or (opts["ancillas"] % 2):
        raise UsageError(f"{opts['ancillas']} ancillas give an odd vertex count")
    try:
        result = discover(spec, opts["ancillas"], cfg)
    except NoSolutionFound as exc:
        _err(str(exc))
        return EXIT_EXHAUSTED
    except DiscoveryError as exc:
        _err(str(exc))
        return EXIT_EXHAUSTED
    g = result.graph.with_meta(
        gate=args.gate, seed=cfg.seed, restart=result.restart, fidelity=result.fidelity,
        loss=result.loss, edge_count=result.edge_count, snapped=result.snapped,
        config=asdict(cfg), loss_trace=[list(t) for t in result.loss_trace])
    if opts["trace"]:
        _write(opts["trace"], result.trace_csv())
    if opts["output"] is not None:
        _write(opts["output"], graph_to_json(g) + "\n")
    else:
        print(result.report.summary())
        print(f"restart {result.restart}, {result.edge_count} edges")
    return EXIT_OK if result.success else EXIT_FAILED


def cmd_verify(args: argparse.Namespace) -> int:
    opts = _merge(args, VERIFY_DEFAULTS)
    g = _read_graph(args.graph)
    spec = parse_gate_spec(args.gate)
    report = verify_gate(g, spec, opts["tol"])
    if opts["report"] == "-":
        sys.stdout.write(report.to_json() + "\n")
    else:
        if opts["report"]:
            Path(opts["report"]).write_text(report.to_json() + "\n")
        print(report.summary())
    return EXIT_OK if report.feed_forwardable else EXIT_FAILED


def cmd_state(args: argparse.Namespace) -> int:
    g = _read_graph(args.graph)
    psi = graph_state(g)
    if psi.is_zero:
        print("0  (no perfect matching carries weight)")
        return EXIT_OK
    if args.normalize:
        psi = psi.normalized()
    for key, amp in psi.sorted_terms():
        print(f"|{''.join(map(str, key))}>  {amp.real:+.12f} {amp.imag:+.12f}j  "
              f"|a|={abs(amp):.12f}")
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    g = _read_graph(args.graph)
    fmt = args.format
    if fmt == "dot":
        text = export_dot(g)
    elif fmt == "json":
        text = graph_to_json(g) + "\n"
    else:
        style = "path-erasure" if fmt.endswith("-pe") else "path-identity"
        doc = graph_to_blueprint(g, style)
        text = doc.to_json() + "\n" if args.json else doc.to_text()
    _write(args.output, text)
    return EXIT_OK


def cmd_fixtures(args: argparse.Namespace) -> int:
    if args.action == "list":
        for fid in catalog.list_fixtures():
            print(fid)
        return EXIT_OK
    if args.action == "check":
        status = EXIT_OK
        ids = [args.id] if args.id else catalog.list_fixtures()
        for fid in ids:
            try:
                fx = catalog.load_fixture(fid)
                print(f"{fid:24s} ok  fidelity {fx.report.fidelity:.15f}  "
                      f"ancillas {fx.ancilla_count}  edges {len(fx.graph.edges)}")
            except catalog.FixtureDrift as exc:
                print(f"{fid:24s} DRIFT  {exc}")
                status = EXIT_FAILED
        return status
    if not args.id:
        raise UsageError("fixtures regen needs a fixture id")
    try:
        rep = catalog.regenerate_fixture(args.id, allow_long=args.long,
                                         budget_s=args.budget)
    except catalog.LongRunning as exc:
        _err(f"{exc} (status: long-running)")
        return EXIT_EXHAUSTED
    except catalog.FixtureError as exc:
        _err(str(exc))
        return EXIT_EXHAUSTED
    fx = rep.fixture
    print(f"{fx.id}: fidelity {fx.report.fidelity:.15f}, {len(fx.graph.edges)} edges "
          f"(stored {rep.stored_edges}), ancillas {fx.ancilla_count}, "
          f"{'consistent' if rep.consistent else 'INCONSISTENT: ' + '; '.join(rep.notes)}")
    if args.write:
        print(f"wrote {catalog.save_fixture(fx, args.write)}")
    return EXIT_OK if rep.consistent else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="photongates",
                                description="Design and check heralded photonic gates "
                                            "as colored weighted graphs.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("discover", help="search for a graph realizing a gate")
    d.add_argument("gate", nargs="?", help="gate spec, e.g. cx:2,2")
    d.add_argument("--config")
    d.add_argument("--ancillas", type=int)
    d.add_argument("--seed", type=int)
    d.add_argument("--restarts", type=int)
    d.add_argument("--steps", type=int)
    d.add_argument("--method", choices=["gd", "lbfgs"])
    d.add_argument("--loss", choices=["fidelity", "count_rate"])
    d.add_argument("--search-threshold", type=float)
    d.add_argument("--polish-threshold", type=float)
    d.add_argument("--init-scale", type=float)
    d.add_argument("--real-only", action="store_const", const=True)
    d.add_argument("--snap", action="store_const", const=True)
    d.add_argument("--herald-only", action="store_const", const=True)
    d.add_argument("--rate-weight", type=float, help="count-rate term in fits")
    d.add_argument("--min-rate", type=float, help="bounded count rate floor while pruning")
    d.add_argument("--forbid", nargs="+", metavar="A-B")
    d.add_argument("--trace", metavar="CSV")
    d.add_argument("-o", "--output", metavar="FILE")
    d.set_defaults(func=cmd_discover)

    v = sub.add_parser("verify", help="check a graph against a gate")
    v.add_argument("graph")
    v.add_argument("gate")
    v.add_argument("--config")
    v.add_argument("--tol", type=float)
    v.add_argument("--report", metavar="FILE")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("state", help="print the post-selected state")
    s.add_argument("graph")
    s.add_argument("--normalize", action="store_true")
    s.set_defaults(func=cmd_state)

    e = sub.add_parser("export", help="export a graph")
    e.add_argument("graph")
    e.add_argument("--format", required=True,
                   choices=["dot", "json", "blueprint", "blueprint-pe"])
    e.add_argument("--json", action="store_true", help="blueprint as JSON")
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_export)

    f = sub.add_parser("fixtures", help="list, check or regenerate pinned graphs")
    f.add_argument("action", choices=["list", "check", "regen"])
    f.add_argument("id", nargs="?")
    f.add_argument("--long", action="store_true", help="allow long-running recipes")
    f.add_argument("--budget", type=float, help="seconds before giving up")
    f.add_argument("--write", metavar="DIR", help="store the regenerated fixture")
    f.set_defaults(func=cmd_fixtures)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, GateSpecParseError, LayoutError, GateError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except (OSError, GraphError, json.JSONDecodeError, catalog.FixtureError) as exc:
        _err(str(exc))
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
