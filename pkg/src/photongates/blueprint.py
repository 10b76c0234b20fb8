"""Experiment descriptions and DOT drawings of graphs.

A blueprint reads a graph as an optical setup: every edge is a photon-pair
source (or an input photon routed into a path), every vertex with several
incident edges is a place where paths are overlapped (path identity) or
where which-source information is erased later (path erasure), and every
ancilla is a detector that must click in its heralding mode.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Any

from .graph import ANCILLA, INPUT, OUTPUT, Graph, require_valid

STYLES = ("path-identity", "path-erasure")

# Graphviz X11 names, one per mode; cycles for large dimensions.
MODE_COLORS = ("blue", "red", "green", "orange", "purple", "brown", "cyan", "magenta")


def phase_degrees(w: complex) -> float:
    """Phase of ``w`` in [0, 360), with near-360 values folded to 0."""
    deg = math.degrees(cmath.phase(w)) % 360.0
    if deg >= 360.0 - 1e-9:
        deg = 0.0
    return round(deg, 9) + 0.0


@dataclass
class BlueprintDoc:
    style: str
    sources: list[dict[str, Any]] = field(default_factory=list)
    overlaps: list[dict[str, Any]] = field(default_factory=list)
    detectors: list[dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {"style": self.style, "sources": self.sources,
                "overlaps": self.overlaps, "detectors": self.detectors}

    def to_json(self, indent: int | None = 1) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def to_text(self) -> str:
        out = [f"# setup ({self.style})", "", "sources:"]
        for s in self.sources:
            kind = "input photon" if s["kind"] == "input" else "pair source"
            out.append(f"  S{s['source']}: {kind} paths {s['path_a']}/{s['path_b']} "
                       f"modes |{s['mode_a']},{s['mode_b']}> amplitude {s['amplitude']:.6g} "
                       f"phase {s['phase']:.6g} deg")
        label = "overlaps:" if self.style == "path-identity" else "erasure stages:"
        out += ["", label]
        for o in self.overlaps:
            out.append(f"  path {o['path']} ({o['role']}): {o['note']}")
        if not self.overlaps:
            out.append("  none")
        out += ["", "detectors:"]
        for d in self.detectors:
            what = (f"herald, must click in mode {d['herald_mode']}" if d["role"] == ANCILLA
                    else d["role"])
            out.append(f"  D{d['path']}: {what}")
        return "\n".join(out) + "\n"


def graph_to_blueprint(g: Graph, style: str = "path-identity") -> BlueprintDoc:
    if style not in STYLES:
        raise ValueError(f"unknown style {style!r}; use one of {STYLES}")
    require_valid(g)
    doc = BlueprintDoc(style)
    roles = {v.id: v.role for v in g.vertices}
    for k, e in enumerate(g.edges):
        kind = "input" if INPUT in (roles[e.a], roles[e.b]) else "pair"
        doc.sources.append({"source": k, "kind": kind, "path_a": e.a, "path_b": e.b,
                            "mode_a": e.mode_a, "mode_b": e.mode_b,
                            "amplitude": abs(e.weight), "phase": phase_degrees(e.weight)})
    for v in g.vertices:
        feeding = [k for k, e in enumerate(g.edges) if v.id in (e.a, e.b)]
        if len(feeding) <= 1:
            continue
        if style == "path-identity":
            note = (f"sources {feeding} share this path; their photons are "
                    f"indistinguishable here")
        else:
            note = (f"sources {feeding} emit into separate paths that are combined "
                    f"and erased of which-source information before detection")
        doc.overlaps.append({"path": v.id, "role": v.role, "sources": feeding, "note": note})
    for v in g.vertices:
        if v.role == ANCILLA:
            doc.detectors.append({"path": v.id, "role": ANCILLA, "herald_mode": v.fixed_mode})
    for v in g.vertices:
        if v.role == OUTPUT:
            doc.detectors.append({"path": v.id, "role": OUTPUT, "herald_mode": None})
    return doc


def export_dot(g: Graph, name: str = "G") -> str:
    """Deterministic Graphviz document; edges in canonical key order."""
    lines = [f"graph {name} {{", "  node [shape=circle];"]
    for v in g.vertices:
        shape = {INPUT: "invtriangle", OUTPUT: "triangle", ANCILLA: "box"}[v.role]
        lines.append(f'  v{v.id} [label="{v.id}/{v.role}/{v.dim}", shape={shape}];')
    for k in sorted(range(len(g.edges)), key=lambda i: g.edges[i].key):
        e = g.edges[k]
        ca = MODE_COLORS[e.mode_a % len(MODE_COLORS)]
        cb = MODE_COLORS[e.mode_b % len(MODE_COLORS)]
        lines.append(
            f'  v{e.a} -- v{e.b} [color="{ca}:{cb}", mode_a={e.mode_a}, '
            f'mode_b={e.mode_b}, label="|w|={abs(e.weight):.6g} '
            f'phase={phase_degrees(e.weight):.6g}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
