import json

import pydot
import pytest

from photongates.blueprint import export_dot, graph_to_blueprint, phase_degrees
from photongates.graph import Edge, Graph, gate_vertices

from conftest import random_graph, swap_crossing


def teleport_like():
    vs = gate_vertices([2], 2, [0, 0])
    edges = (Edge(0, 2, 0, 0, 1), Edge(0, 3, 1, 0, 1j), Edge(1, 2, 1, 0, -1),
             Edge(1, 3, 0, 0, 1), Edge(2, 3, 0, 0, 0.5))
    return Graph(vs, edges)


def test_phase_degrees():
    assert phase_degrees(1) == 0
    assert phase_degrees(1j) == pytest.approx(90)
    assert phase_degrees(-1) == pytest.approx(180)
    assert phase_degrees(-1j) == pytest.approx(270)
    assert phase_degrees(complex(1, -1e-15)) == 0


def test_blueprint_has_one_source_per_edge():
    g = teleport_like()
    doc = graph_to_blueprint(g)
    assert len(doc.sources) == len(g.edges)
    assert [s["kind"] for s in doc.sources] == ["input", "input", "pair", "pair", "pair"]
    assert doc.sources[1]["phase"] == pytest.approx(90)


def test_blueprint_detectors_and_overlaps():
    doc = graph_to_blueprint(teleport_like())
    heralds = [d for d in doc.detectors if d["role"] == "ancilla"]
    assert [(d["path"], d["herald_mode"]) for d in heralds] == [(2, 0), (3, 0)]
    assert [d["path"] for d in doc.detectors if d["role"] == "output"] == [1]
    # every vertex has at least two edges
    assert [o["path"] for o in doc.overlaps] == [0, 1, 2, 3]


def test_blueprint_styles_differ_only_in_notes():
    g = teleport_like()
    a = graph_to_blueprint(g, "path-identity")
    b = graph_to_blueprint(g, "path-erasure")
    assert a.sources == b.sources and a.detectors == b.detectors
    assert a.overlaps[0]["note"] != b.overlaps[0]["note"]
    assert "erasure" in b.to_text()
    with pytest.raises(ValueError):
        graph_to_blueprint(g, "holographic")


def test_blueprint_json_round_trips():
    doc = graph_to_blueprint(swap_crossing(2))
    assert json.loads(doc.to_json()) == doc.to_dict()


def test_dot_parses_and_lists_every_edge(rng):
    for _ in range(20):
        g = random_graph(rng, 6, 12)
        text = export_dot(g)
        (parsed,) = pydot.graph_from_dot_data(text)
        assert len(parsed.get_edges()) == len(g.edges)
        assert len([n for n in parsed.get_nodes() if n.get_name().startswith("v")]) == g.n


def test_dot_is_deterministic_and_order_independent():
    g = teleport_like()
    shuffled = Graph(g.vertices, tuple(reversed(g.edges)))
    assert export_dot(g) == export_dot(g)
    assert export_dot(g) == export_dot(shuffled)


def test_dot_carries_modes_and_phase():
    text = export_dot(teleport_like())
    assert 'v0 -- v3 [color="red:blue", mode_a=1, mode_b=0, label="|w|=1 phase=90"]' in text
    assert 'label="0/input/2", shape=invtriangle' in text
