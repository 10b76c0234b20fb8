import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photongates.graph import (Edge, Graph, ParseError, SchemaError, ValidationError,
                               Vertex, canonicalize_edge, graph_from_json, graph_to_json,
                               validate_graph)

from conftest import random_graph


def two_vertex(*edges):
    return Graph((Vertex.ancilla(0), Vertex.ancilla(1)), tuple(edges))


def test_canonicalize_swaps_endpoints_and_modes():
    e = canonicalize_edge(3, 1, 0, 1, 1 + 0j)
    assert e == Edge(1, 3, 1, 0, 1)


def test_canonicalize_keeps_canonical_edge():
    assert canonicalize_edge(1, 3, 0, 1, 0.5j) == Edge(1, 3, 0, 1, 0.5j)


def test_canonicalize_rejects_self_loop():
    with pytest.raises(ValidationError):
        canonicalize_edge(2, 2, 0, 0, 1)


@given(st.integers(0, 20), st.integers(0, 20), st.integers(0, 3), st.integers(0, 3),
       st.complex_numbers(allow_nan=False, allow_infinity=False))
def test_canonicalize_idempotent(a, b, ma, mb, w):
    if a == b:
        return
    e = canonicalize_edge(a, b, ma, mb, w)
    assert canonicalize_edge(e.a, e.b, e.mode_a, e.mode_b, e.weight) == e
    assert e.a < e.b
    assert e.weight == complex(w)


def test_single_edge_graph_is_valid():
    report = validate_graph(two_vertex(Edge(0, 1, 0, 0, 1)))
    assert report.ok and not report.violations


def test_duplicate_edge_key_reported():
    report = validate_graph(two_vertex(Edge(0, 1, 0, 0, 1), Edge(0, 1, 0, 0, 2)))
    assert "duplicate-edge" in report.codes()
    assert not report.ok


def test_odd_vertex_count_is_a_warning():
    g = Graph(tuple(Vertex.ancilla(i) for i in range(3)), (Edge(0, 1, 0, 0, 1),))
    report = validate_graph(g)
    assert report.ok
    assert [v.code for v in report.warnings] == ["odd-vertex-count"]


def test_validation_catches_each_kind_of_problem():
    g = Graph((Vertex.input(0, 0, 2), Vertex.output(1, 0, 3), Vertex.ancilla(3, 0)),
              (Edge(0, 1, 2, 0, 1), Edge(1, 0, 0, 0, 1)))
    codes = set(validate_graph(g).codes())
    assert {"gapped-ids", "io-dim-mismatch", "mode-range", "non-canonical",
            "odd-vertex-count"} <= codes


@settings(max_examples=200)
@given(st.lists(st.tuples(st.integers(-2, 6), st.integers(-2, 6), st.integers(-1, 4),
                          st.integers(-1, 4)), max_size=8),
       st.lists(st.sampled_from(["input", "output", "ancilla", "bogus"]), max_size=6),
       st.lists(st.integers(-1, 4), min_size=6, max_size=6))
def test_validate_is_total(edges, roles, dims):
    vertices = tuple(Vertex(i, r, dims[i], position=i if r != "ancilla" else None,
                            fixed_mode=0 if r == "ancilla" else None)
                     for i, r in enumerate(roles))
    g = Graph(vertices, tuple(Edge(a, b, ma, mb, 1) for a, b, ma, mb in edges))
    validate_graph(g)


def test_round_trip_preserves_edge_order(rng):
    for _ in range(20):
        g = random_graph(rng, 6, 10)
        g2 = graph_from_json(graph_to_json(g))
        assert g2 == g
        assert [e.key for e in g2.edges] == [e.key for e in g.edges]
        assert [e.weight for e in g2.edges] == [e.weight for e in g.edges]


def test_weights_serialize_as_pairs():
    doc = json.loads(graph_to_json(two_vertex(Edge(0, 1, 0, 0, 0.25 - 2j))))
    assert doc["edges"][0]["weight"] == [0.25, -2.0]


def doc_for(edge_overrides=None, vertex_overrides=None):
    doc = {"vertices": [{"id": 0, "role": "input", "position": 0, "dim": 2},
                        {"id": 1, "role": "output", "position": 0, "dim": 2}],
           "edges": [{"a": 0, "b": 1, "mode_a": 0, "mode_b": 0, "weight": [1.0, 0.0]}],
           "meta": {"note": "x"}}
    doc["edges"][0].update(edge_overrides or {})
    doc["vertices"][0].update(vertex_overrides or {})
    return doc


def test_scalar_weight_is_schema_error():
    with pytest.raises(SchemaError):
        graph_from_json(json.dumps(doc_for({"weight": 1})))


def test_mode_outside_dim_is_invariant_error():
    with pytest.raises(ValidationError):
        graph_from_json(json.dumps(doc_for({"mode_a": 2})))


def test_malformed_json_is_parse_error():
    with pytest.raises(ParseError):
        graph_from_json("{not json")


def test_unknown_keys():
    doc = doc_for()
    doc["extra_top_level"] = 5
    assert graph_from_json(json.dumps(doc)).n == 2
    with pytest.raises(SchemaError):
        graph_from_json(json.dumps(doc_for({"colour": 1})))
    with pytest.raises(SchemaError):
        graph_from_json(json.dumps(doc_for(vertex_overrides={"label": "a"})))


def test_error_kinds_are_distinct():
    assert not issubclass(ParseError, SchemaError)
    assert not issubclass(SchemaError, ValidationError)
    assert not issubclass(ValidationError, SchemaError)


def test_meta_survives_round_trip():
    g = two_vertex(Edge(0, 1, 1, 0, 1)).with_meta(source="test", seed=3)
    assert graph_from_json(graph_to_json(g)).meta == {"source": "test", "seed": 3}
