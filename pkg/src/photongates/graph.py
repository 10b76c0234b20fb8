"""Colored, complex-weighted experiment graphs.

Vertices are photon paths. Every vertex has a role (input, output or
ancilla) and a local dimension. Edges join two distinct vertices and carry
one mode ("color") at each endpoint plus a complex weight.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable

INPUT = "input"
OUTPUT = "output"
ANCILLA = "ancilla"
ROLES = (INPUT, OUTPUT, ANCILLA)


class GraphError(Exception):
    """Base class for graph construction and parsing failures."""


class ValidationError(GraphError):
    """A graph invariant is violated."""


class ParseError(GraphError):
    """The document is not well-formed JSON."""


class SchemaError(GraphError):
    """The document is JSON but does not follow the graph schema."""


@dataclass(frozen=True)
class Vertex:
    id: int
    role: str
    dim: int = 2
    position: int | None = None
    fixed_mode: int | None = None

    @classmethod
    def input(cls, id: int, position: int, dim: int = 2) -> Vertex:
        return cls(id, INPUT, dim, position=position)

    @classmethod
    def output(cls, id: int, position: int, dim: int = 2) -> Vertex:
        return cls(id, OUTPUT, dim, position=position)

    @classmethod
    def ancilla(cls, id: int, fixed_mode: int = 0, dim: int = 2) -> Vertex:
        return cls(id, ANCILLA, dim, fixed_mode=fixed_mode)


@dataclass(frozen=True)
class Edge:
    """A photon pair (or an input-to-output transition) between paths a and b.

    ``mode_a`` is the color seen at endpoint ``a``, ``mode_b`` the one at ``b``.
    """

    a: int
    b: int
    mode_a: int
    mode_b: int
    weight: complex = 1.0 + 0.0j

    @property
    def key(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.mode_a, self.mode_b)

    def with_weight(self, weight: complex) -> Edge:
        return Edge(self.a, self.b, self.mode_a, self.mode_b, complex(weight))

    def mode_at(self, v: int) -> int:
        if v == self.a:
            return self.mode_a
        if v == self.b:
            return self.mode_b
        raise ValueError(f"vertex {v} is not an endpoint of {self.key}")


def canonicalize_edge(a: int, b: int, mode_a: int, mode_b: int,
                      weight: complex = 1.0) -> Edge:
    """Return the edge with endpoints in ascending order.

    Modes travel with their endpoint. Self-loops raise ``ValidationError``.
    """
    if a == b:
        raise ValidationError(f"self-loop on vertex {a}")
    if a > b:
        a, b, mode_a, mode_b = b, a, mode_b, mode_a
    return Edge(int(a), int(b), int(mode_a), int(mode_b), complex(weight))


@dataclass(frozen=True)
class Graph:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...] = ()
    meta: dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(v.dim for v in self.vertices)

    @property
    def weights(self) -> list[complex]:
        return [e.weight for e in self.edges]

    def with_weights(self, weights: Iterable[complex]) -> Graph:
        weights = list(weights)
        if len(weights) != len(self.edges):
            raise ValueError("weight count does not match edge count")
        edges = tuple(e.with_weight(w) for e, w in zip(self.edges, weights))
        return Graph(self.vertices, edges, dict(self.meta))

    def with_edges(self, edges: Iterable[Edge]) -> Graph:
        return Graph(self.vertices, tuple(edges), dict(self.meta))

    def without_edges(self, indices: Iterable[int]) -> Graph:
        drop = set(indices)
        return self.with_edges(e for i, e in enumerate(self.edges) if i not in drop)

    def with_meta(self, **meta: Any) -> Graph:
        return Graph(self.vertices, self.edges, {**self.meta, **meta})

    def ids_with_role(self, role: str) -> list[int]:
        """Vertex ids of a role; inputs/outputs sorted by position."""
        vs = [v for v in self.vertices if v.role == role]
        if role in (INPUT, OUTPUT):
            vs.sort(key=lambda v: v.position)
        return [v.id for v in vs]

    @property
    def inputs(self) -> list[int]:
        return self.ids_with_role(INPUT)

    @property
    def outputs(self) -> list[int]:
        return self.ids_with_role(OUTPUT)

    @property
    def ancillas(self) -> list[int]:
        return self.ids_with_role(ANCILLA)

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in (e.a, e.b))


@dataclass(frozen=True)
class Violation:
    level: str  # "error" or "warning"
    code: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def errors(self) -> list[Violation]:
        return [v for v in self.violations if v.level == "error"]

    @property
    def warnings(self) -> list[Violation]:
        return [v for v in self.violations if v.level == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def codes(self) -> list[str]:
        return [v.code for v in self.violations]

    def __bool__(self) -> bool:
        return self.ok


def validate_graph(g: Graph) -> ValidationReport:
    """Collect every violated invariant of ``g`` without raising."""
    report = ValidationReport()

    def err(code, msg, level="error"):
        report.violations.append(Violation(level, code, msg))

    dims: dict[int, int] = {}
    for i, v in enumerate(g.vertices):
        if v.id != i:
            err("gapped-ids", f"vertex at index {i} has id {v.id}")
        if v.role not in ROLES:
            err("bad-role", f"vertex {v.id} has unknown role {v.role!r}")
        if not isinstance(v.dim, int) or v.dim < 2:
            err("bad-dim", f"vertex {v.id} has dimension {v.dim!r} < 2")
        dims[v.id] = v.dim
        if v.role == ANCILLA:
            if v.fixed_mode is None or not (0 <= v.fixed_mode < max(v.dim, 0)):
                err("bad-fixed-mode",
                    f"ancilla {v.id} fixed mode {v.fixed_mode!r} outside [0, {v.dim})")
        elif v.role in (INPUT, OUTPUT) and (v.position is None or v.position < 0):
            err("bad-position", f"vertex {v.id} ({v.role}) lacks a position")

    for role in (INPUT, OUTPUT):
        pos = sorted(v.position for v in g.vertices
                     if v.role == role and v.position is not None)
        if pos != list(range(len(pos))):
            err("gapped-positions", f"{role} positions {pos} are not 0..k-1")
    ins = {v.position: v for v in g.vertices if v.role == INPUT}
    outs = {v.position: v for v in g.vertices if v.role == OUTPUT}
    if len(ins) != len(outs):
        err("unpaired-io", f"{len(ins)} inputs but {len(outs)} outputs")
    for p, vi in ins.items():
        vo = outs.get(p)
        if vo is not None and vo.dim != vi.dim:
            err("io-dim-mismatch",
                f"input {vi.id} (dim {vi.dim}) and output {vo.id} (dim {vo.dim}) "
                f"share position {p}")

    seen: set[tuple[int, int, int, int]] = set()
    for k, e in enumerate(g.edges):
        if e.a == e.b:
            err("self-loop", f"edge {k} is a self-loop on {e.a}")
        elif e.a > e.b:
            err("non-canonical", f"edge {k} has a > b ({e.a}, {e.b})")
        for end, mode in ((e.a, e.mode_a), (e.b, e.mode_b)):
            if end not in dims:
                err("unknown-vertex", f"edge {k} references missing vertex {end}")
            elif not (0 <= mode < dims[end]):
                err("mode-range",
                    f"edge {k}: mode {mode} at vertex {end} outside [0, {dims[end]})")
        if e.key in seen:
            err("duplicate-edge", f"edge {k} repeats key {e.key}")
        seen.add(e.key)
        if not (math.isfinite(e.weight.real) and math.isfinite(e.weight.imag)):
            err("bad-weight", f"edge {k} has non-finite weight {e.weight}")

    if g.n % 2:
        err("odd-vertex-count",
            f"{g.n} vertices: no perfect matching exists, the state is zero",
            level="warning")
    return report


def require_valid(g: Graph) -> Graph:
    report = validate_graph(g)
    if not report.ok:
        raise ValidationError("; ".join(v.message for v in report.errors))
    return g


# -- serialization ---------------------------------------------------------

_VERTEX_KEYS = {"id", "role", "dim", "position", "fixed_mode", "name"}
_EDGE_KEYS = {"a", "b", "mode_a", "mode_b", "weight"}


def graph_to_dict(g: Graph) -> dict[str, Any]:
    vertices = []
    for v in g.vertices:
        d: dict[str, Any] = {"id": v.id, "role": v.role}
        if v.role == ANCILLA:
            d["fixed_mode"] = v.fixed_mode
        else:
            d["position"] = v.position
        d["dim"] = v.dim
        vertices.append(d)
    edges = [{"a": e.a, "b": e.b, "mode_a": e.mode_a, "mode_b": e.mode_b,
              "weight": [e.weight.real, e.weight.imag]} for e in g.edges]
    return {"vertices": vertices, "edges": edges, "meta": dict(g.meta)}


def graph_to_json(g: Graph, indent: int | None = 1) -> str:
    """Serialize a valid graph; weights become ``[re, im]`` pairs."""
    require_valid(g)
    return json.dumps(graph_to_dict(g), indent=indent, sort_keys=False)


def _expect_int(obj: Any, what: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise SchemaError(f"{what} must be an integer, got {obj!r}")
    return obj


def _number(obj: Any, what: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise SchemaError(f"{what} must be a number, got {obj!r}")
    return float(obj)


def graph_from_dict(doc: Any) -> Graph:
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    if "vertices" not in doc or "edges" not in doc:
        raise SchemaError("missing 'vertices' or 'edges'")
    if not isinstance(doc["vertices"], list) or not isinstance(doc["edges"], list):
        raise SchemaError("'vertices' and 'edges' must be arrays")
    meta = doc.get("meta", {})
    if not isinstance(meta, dict):
        raise SchemaError("'meta' must be an object")

    vertices = []
    for i, vd in enumerate(doc["vertices"]):
        if not isinstance(vd, dict):
            raise SchemaError(f"vertex {i} must be an object")
        extra = set(vd) - _VERTEX_KEYS
        if extra:
            raise SchemaError(f"vertex {i} has unknown keys {sorted(extra)}")
        for k in ("id", "role", "dim"):
            if k not in vd:
                raise SchemaError(f"vertex {i} lacks {k!r}")
        role = vd["role"]
        if role not in ROLES:
            raise SchemaError(f"vertex {i} has unknown role {role!r}")
        vid = _expect_int(vd["id"], f"vertex {i} id")
        dim = _expect_int(vd["dim"], f"vertex {i} dim")
        if role == ANCILLA:
            fixed = _expect_int(vd.get("fixed_mode", 0), f"vertex {i} fixed_mode")
            vertices.append(Vertex(vid, role, dim, fixed_mode=fixed))
        else:
            if "position" not in vd:
                raise SchemaError(f"vertex {i} ({role}) lacks 'position'")
            pos = _expect_int(vd["position"], f"vertex {i} position")
            vertices.append(Vertex(vid, role, dim, position=pos))
    vertices.sort(key=lambda v: v.id)

    edges = []
    for i, ed in enumerate(doc["edges"]):
        if not isinstance(ed, dict):
            raise SchemaError(f"edge {i} must be an object")
        extra = set(ed) - _EDGE_KEYS
        if extra:
            raise SchemaError(f"edge {i} has unknown keys {sorted(extra)}")
        missing = _EDGE_KEYS - set(ed)
        if missing:
            raise SchemaError(f"edge {i} lacks {sorted(missing)}")
        w = ed["weight"]
        if not isinstance(w, list) or len(w) != 2:
            raise SchemaError(f"edge {i} weight must be a [re, im] pair, got {w!r}")
        weight = complex(_number(w[0], f"edge {i} re"), _number(w[1], f"edge {i} im"))
        edges.append(Edge(_expect_int(ed["a"], f"edge {i} a"),
                          _expect_int(ed["b"], f"edge {i} b"),
                          _expect_int(ed["mode_a"], f"edge {i} mode_a"),
                          _expect_int(ed["mode_b"], f"edge {i} mode_b"),
                          weight))
    return require_valid(Graph(tuple(vertices), tuple(edges), dict(meta)))


def graph_from_json(text: str) -> Graph:
    """Parse a graph document.

    Raises ``ParseError`` for malformed JSON, ``SchemaError`` for documents
    that do not follow the schema and ``ValidationError`` for graphs that
    break an invariant (e.g. a mode outside its vertex dimension).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc)) from exc
    return graph_from_dict(doc)


def gate_vertices(dims: Iterable[int], n_ancillas: int = 0,
                  ancilla_modes: Iterable[int] | None = None,
                  ancilla_dim: int = 2) -> tuple[Vertex, ...]:
    """Standard layout: inputs 0..k-1, outputs k..2k-1, then ancillas."""
    dims = list(dims)
    k = len(dims)
    modes = list(ancilla_modes) if ancilla_modes is not None else [0] * n_ancillas
    if len(modes) != n_ancillas:
        raise ValueError("need one fixed mode per ancilla")
    vs = [Vertex.input(i, i, d) for i, d in enumerate(dims)]
    vs += [Vertex.output(k + i, i, d) for i, d in enumerate(dims)]
    vs += [Vertex.ancilla(2 * k + j, m, max(ancilla_dim, m + 1))
           for j, m in enumerate(modes)]
    return tuple(vs)
