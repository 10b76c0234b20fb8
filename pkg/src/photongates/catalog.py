"""Pinned gate graphs.

Each fixture is a graph document (see :mod:`photongates.graph`) with an
extra top-level ``"fixture"`` block holding the gate, the expected
fidelity and ancilla count, and how the graph was produced. Loading a
fixture re-verifies it; a fixture that no longer verifies is an error,
not a warning.
"""

from __future__ import annotations

import datetime
import json
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .discovery import (DiscoveryResult, NoSolutionFound, OptimizerConfig, discover,
                        drop_zero_edges, refine_weights)
from .gates import GateSpec, parse_gate_spec, target_for_graph
from .graph import Graph, canonicalize_edge, gate_vertices, graph_from_dict, graph_to_dict
from .objective import VerificationReport, bounded_count_rate, gauge_normalize, verify_gate

LOAD_TOL = 1e-9
# bounded count rate below which a graph is a limit of diverging weights,
# not a gate one could build
MIN_RATE = 1e-2
FIXTURE_DIR = Path(str(resources.files("photongates") / "fixtures"))


class FixtureError(Exception):
    pass


class UnknownFixture(FixtureError, KeyError):
    pass


class FixtureDrift(FixtureError):
    """A stored fixture no longer passes its own contract."""


class LongRunning(FixtureError):
    """Regeneration did not finish within the allowed budget."""

    status = "long-running"


@dataclass(frozen=True)
class Recipe:
    gate: str
    ancillas: int
    seed: int = 1
    restarts: int = 50
    method: str = "gd"
    steps: int = 2000
    herald_only: bool = False
    search_threshold: float = 1e-3
    rate_weight: float = 0.0
    min_rate: float = 0.0
    forbid: tuple[tuple[int, int], ...] = ()
    # (input vertex, output vertex) pairs that must not share an edge
    nonlocal_pairs: tuple[tuple[int, int], ...] = ()
    long_running: bool = False
    composed_from: str | None = None
    note: str = ""

    def config(self) -> OptimizerConfig:
        return OptimizerConfig(seed=self.seed, max_restarts=self.restarts,
                               method=self.method, steps=self.steps,
                               herald_only=self.herald_only, forbid=self.forbid,
                               search_threshold=self.search_threshold,
                               rate_weight=self.rate_weight, min_rate=self.min_rate)


RECIPES: dict[str, Recipe] = {
    "swap2-crossing": Recipe("swap:2", 0, seed=1,
                             note="each input wired straight to the opposite output"),
    "teleport2-pi": Recipe("teleport:2", 2, seed=1, forbid=((0, 1),),
                           nonlocal_pairs=((0, 1),),
                           note="identity channel without an input-output edge"),
    "swap2-double-teleport": Recipe("swap:2", 4, composed_from="teleport2-pi",
                                    nonlocal_pairs=((0, 3), (1, 2), (0, 2), (1, 3)),
                                    note="two teleport2-pi channels wired crosswise"),
    "cx-2-2": Recipe("cx:2,2", 2, seed=1,
                     note="qubit CNOT with two heralding ancillas"),
    "cx-2-3": Recipe("cx:2,3", 2, seed=1, method="lbfgs", herald_only=True, steps=3000,
                     search_threshold=1e-5, rate_weight=0.01, min_rate=0.05,
                     note="smallest ancilla count found by sweeping"),
    "cx-2-4": Recipe("cx:2,4", 2, seed=1, method="lbfgs", herald_only=True, steps=3000,
                     search_threshold=1e-5, rate_weight=0.01, min_rate=0.05,
                     note="smallest ancilla count found by sweeping"),
    "cx-3-3": Recipe("cx:3,3", 4, seed=2, method="lbfgs", herald_only=True,
                     restarts=20, steps=3000, long_running=True,
                     search_threshold=1e-5, rate_weight=0.01, min_rate=0.05),
    "ccx-2": Recipe("ccx:2", 4, seed=1, method="lbfgs", herald_only=True,
                    restarts=20, steps=3000, long_running=True),
    "ccx-3": Recipe("ccx:3", 4, seed=4, method="lbfgs", herald_only=True,
                    restarts=20, steps=3000, long_running=True),
    "cswap-2": Recipe("cswap", 4, seed=1, method="lbfgs", herald_only=True,
                      restarts=20, steps=3000, long_running=True),
}


@dataclass
class Fixture:
    id: str
    spec: GateSpec
    graph: Graph
    expected: dict[str, Any]
    provenance: dict[str, Any]
    nonlocal_pairs: tuple[tuple[int, int], ...] = ()
    report: VerificationReport | None = field(default=None, repr=False)

    @property
    def ancilla_count(self) -> int:
        return len(self.graph.ancillas)

    def to_dict(self) -> dict[str, Any]:
        doc = graph_to_dict(self.graph)
        doc["fixture"] = {
            "id": self.id,
            "gate": self.provenance.get("gate", self.spec.name),
            "expected": self.expected,
            "nonlocal_pairs": [list(p) for p in self.nonlocal_pairs],
            "provenance": self.provenance,
        }
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def list_fixtures(directory: Path | None = None) -> list[str]:
    """Ids with a stored file, in recipe order, then any extras alphabetically."""
    directory = Path(directory or FIXTURE_DIR)
    stored = {p.stem for p in directory.glob("*.json")}
    known = [k for k in RECIPES if k in stored]
    return known + sorted(stored - set(RECIPES))


def nonlocality_violations(g: Graph, pairs) -> list[tuple[int, int]]:
    bad = []
    for a, b in pairs:
        lo, hi = sorted((a, b))
        if any(e.a == lo and e.b == hi for e in g.edges):
            bad.append((lo, hi))
    return bad


def check_fixture(fx: Fixture, tol: float = LOAD_TOL) -> VerificationReport:
    """Verify ``fx`` against its own contract; raises :class:`FixtureDrift`."""
    report = verify_gate(fx.graph, fx.spec, tol)
    problems = []
    if not report.feed_forwardable:
        problems.append(f"fidelity {report.fidelity:.12g}, "
                        f"{report.rows_passed}/{len(report.truth_table)} rows pass at {tol:g}")
    want = fx.expected.get("ancilla_count")
    if want is not None and want != fx.ancilla_count:
        problems.append(f"{fx.ancilla_count} ancillas, expected {want}")
    bad = nonlocality_violations(fx.graph, fx.nonlocal_pairs)
    if bad:
        problems.append(f"direct edges between paired paths {bad}")
    rate = bounded_count_rate(fx.graph, target_for_graph(fx.spec, fx.graph))
    if report.feed_forwardable and rate < MIN_RATE:
        problems.append(f"bounded count rate {rate:.3g}: weights only reach the gate "
                        f"as a limit")
    if problems:
        raise FixtureDrift(f"fixture {fx.id}: " + "; ".join(problems))
    fx.report = report
    return report


def fixture_from_dict(doc: dict[str, Any], fixture_id: str | None = None) -> Fixture:
    block = doc.get("fixture")
    if not isinstance(block, dict):
        raise FixtureError("document has no 'fixture' block")
    g = graph_from_dict(doc)
    spec = parse_gate_spec(block["gate"])
    return Fixture(fixture_id or block["id"], spec, g, dict(block.get("expected", {})),
                   dict(block.get("provenance", {})),
                   tuple(tuple(p) for p in block.get("nonlocal_pairs", [])))


def load_fixture(fixture_id: str, directory: Path | None = None,
                 tol: float = LOAD_TOL) -> Fixture:
    path = Path(directory or FIXTURE_DIR) / f"{fixture_id}.json"
    if not path.exists():
        raise UnknownFixture(f"unknown fixture {fixture_id!r}")
    fx = fixture_from_dict(json.loads(path.read_text()), fixture_id)
    check_fixture(fx, tol)
    return fx


def save_fixture(fx: Fixture, directory: Path | None = None) -> Path:
    directory = Path(directory or FIXTURE_DIR)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{fx.id}.json"
    path.write_text(fx.to_json() + "\n")
    return path


def cross_wire(channel: Graph) -> Graph:
    """Two copies of a one-photon channel: A's input to B's output and back.

    ``channel`` must have one input, one output and any number of ancillas.
    The result has inputs 0 (A), 1 (B), outputs 2 (A), 3 (B), then the
    ancillas of the first copy followed by those of the second.
    """
    if len(channel.inputs) != 1 or len(channel.outputs) != 1:
        raise ValueError("cross_wire needs a single-input, single-output channel")
    (i0,), (o0,), ancs = channel.inputs, channel.outputs, channel.ancillas
    d = channel.vertices[i0].dim
    modes = [channel.vertices[a].fixed_mode for a in ancs]
    adims = {channel.vertices[a].dim for a in ancs} or {2}
    vertices = gate_vertices([d, d], 2 * len(ancs), modes + modes, max(adims))
    edges = []
    for copy, (src, dst) in enumerate(((0, 3), (1, 2))):
        relabel = {i0: src, o0: dst}
        relabel.update({a: 4 + copy * len(ancs) + j for j, a in enumerate(ancs)})
        for e in channel.edges:
            edges.append(canonicalize_edge(relabel[e.a], relabel[e.b], e.mode_a, e.mode_b,
                                           e.weight))
    return Graph(vertices, tuple(edges), {"gate": "swap:%d" % d})


def _today() -> str:
    return datetime.date.today().isoformat()


def build_fixture(fixture_id: str, cfg: OptimizerConfig | None = None,
                  budget_s: float | None = None, directory: Path | None = None,
                  refine: bool = True) -> tuple[Fixture, DiscoveryResult | None]:
    """Run a fixture's recipe from scratch; no comparison with the stored file."""
    if fixture_id not in RECIPES:
        raise UnknownFixture(f"unknown fixture {fixture_id!r}")
    rec = RECIPES[fixture_id]
    spec = parse_gate_spec(rec.gate)
    if rec.composed_from:
        base, _ = build_fixture(rec.composed_from, None, budget_s, directory, refine)
        g = cross_wire(base.graph)
        prov = {"gate": rec.gate, "composed_from": rec.composed_from,
                "seed": base.provenance.get("seed"), "date": _today(), "note": rec.note}
        fx = Fixture(fixture_id, spec, g, {"fidelity": 1.0, "ancilla_count": rec.ancillas},
                     prov, rec.nonlocal_pairs)
        check_fixture(fx)
        fx.expected["fidelity"] = fx.report.fidelity
        return fx, None

    cfg = cfg or rec.config()
    deadline = None if budget_s is None else time.monotonic() + budget_s
    result = discover(spec, rec.ancillas, cfg, deadline=deadline)
    g = result.graph
    if refine:
        g = drop_zero_edges(refine_weights(g, target_for_graph(spec, g), max_nfev=2000))
    g = gauge_normalize(g)
    prov = {"gate": rec.gate, "seed": cfg.seed, "restart": result.restart,
            "cfg_digest": cfg.digest(), "method": cfg.method, "date": _today(),
            "note": rec.note}
    fx = Fixture(fixture_id, spec, g.with_meta(gate=rec.gate),
                 {"fidelity": 1.0, "ancilla_count": rec.ancillas}, prov, rec.nonlocal_pairs)
    check_fixture(fx)
    fx.expected["fidelity"] = fx.report.fidelity
    return fx, result


@dataclass
class RegenReport:
    fixture: Fixture
    stored_edges: int | None
    consistent: bool
    notes: list[str]


def regenerate_fixture(fixture_id: str, cfg: OptimizerConfig | None = None,
                       allow_long: bool = False, budget_s: float | None = None,
                       directory: Path | None = None) -> RegenReport:
    """Re-run a recipe and compare with the stored fixture at the invariant level.

    The comparison checks ancilla count, edge count (at most two more than
    stored) and fidelity; graphs are not required to be isomorphic.
    Long-running recipes raise :class:`LongRunning` unless ``allow_long``.
    """
    if fixture_id not in RECIPES:
        raise UnknownFixture(f"unknown fixture {fixture_id!r}")
    rec = RECIPES[fixture_id]
    if rec.long_running and not allow_long:
        raise LongRunning(f"{fixture_id} is tiered long-running; pass allow_long to run it")
    try:
        fx, _ = build_fixture(fixture_id, cfg, budget_s, directory)
    except TimeoutError as exc:
        raise LongRunning(f"{fixture_id}: {exc}") from exc
    except NoSolutionFound as exc:
        raise FixtureError(f"{fixture_id}: discovery failed: {exc}") from exc
    notes = []
    stored_edges = None
    path = Path(directory or FIXTURE_DIR) / f"{fixture_id}.json"
    if path.exists():
        stored = fixture_from_dict(json.loads(path.read_text()), fixture_id)
        stored_edges = len(stored.graph.edges)
        if stored.ancilla_count != fx.ancilla_count:
            notes.append(f"ancillas {fx.ancilla_count} != stored {stored.ancilla_count}")
        if len(fx.graph.edges) > stored_edges + 2:
            notes.append(f"{len(fx.graph.edges)} edges > stored {stored_edges} + 2")
    if fx.report.fidelity < 1 - LOAD_TOL:
        notes.append(f"fidelity {fx.report.fidelity:.12g}")
    return RegenReport(fx, stored_edges, not notes, notes)
