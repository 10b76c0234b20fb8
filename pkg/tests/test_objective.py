from pathlib import Path

import numpy as np
import pytest

from photongates.gates import build_target, cx, identity, swap, target_for_graph
from photongates.graph import Edge, Graph, gate_vertices, graph_from_json
from photongates.matchings import Ket, graph_state
from photongates.objective import (Objective, ZeroStateError, bounded_count_rate, count_rate,
                                   fidelity, gauge_normalize, loss, loss_gradient, verify_gate)

from conftest import swap_crossing

DATA = Path(__file__).parent / "data"

# qubit CNOT with two ancillas heralded in mode 0, all weights 1
CNOT_EDGES = [(0, 4, 0, 0), (2, 5, 0, 0), (1, 3, 0, 0), (1, 3, 1, 1), (0, 2, 1, 1),
              (1, 4, 0, 0), (3, 5, 1, 0), (1, 5, 1, 0), (3, 4, 0, 0)]


def cnot_graph(weights=None):
    weights = weights if weights is not None else [1.0] * len(CNOT_EDGES)
    return Graph(gate_vertices([2, 2], 2, [0, 0]),
                 tuple(Edge(*e, w) for e, w in zip(CNOT_EDGES, weights)))


def straight_wires(d=2):
    vs = gate_vertices([d, d])
    edges = [Edge(0, 2, m, m, 1) for m in range(d)] + [Edge(1, 3, m, m, 1) for m in range(d)]
    return Graph(vs, tuple(edges))


def test_fidelity_is_scale_and_phase_invariant():
    t = build_target(cx(2, 2)).ket
    assert fidelity(t, t) == pytest.approx(1)
    assert fidelity(t.scaled(3 * np.exp(0.7j)), t) == pytest.approx(1)


def test_fidelity_of_orthogonal_state_is_zero():
    t = build_target(cx(2, 2)).ket
    other = Ket({(0, 0, 1, 1): 1}, t.dims)
    assert fidelity(other, t) == 0


def test_fidelity_in_unit_interval(rng):
    t = build_target(cx(2, 2)).ket
    keys = list(np.ndindex(2, 2, 2, 2))
    for _ in range(50):
        amps = rng.normal(size=16) + 1j * rng.normal(size=16)
        psi = Ket.from_terms(dict(zip(keys, amps)), t.dims)
        f = fidelity(psi, t)
        assert 0 <= f <= 1


def test_fidelity_of_zero_state_raises():
    t = build_target(cx(2, 2)).ket
    with pytest.raises(ZeroStateError):
        fidelity(Ket({}, t.dims), t)


def test_count_rate_keeps_norm():
    t = build_target(cx(2, 2)).ket
    assert count_rate(t.scaled(2), t) == pytest.approx(4)
    g = cnot_graph()
    assert count_rate(graph_state(g), target_for_graph(cx(2, 2), g).ket) == pytest.approx(4)


def test_hand_built_cnot_is_exact():
    g = cnot_graph()
    rep = verify_gate(g, cx(2, 2))
    assert rep.fidelity == pytest.approx(1, abs=1e-12)
    assert rep.feed_forwardable and rep.ancilla_count == 2
    assert [r.observed for r in rep.truth_table] == [(0, 0), (0, 1), (1, 1), (1, 0)]
    assert rep.amplitude_spread == pytest.approx(0)


def test_crossing_wires_realize_swap():
    rep = verify_gate(swap_crossing(2), swap(2))
    assert rep.fidelity == pytest.approx(1) and rep.feed_forwardable


def test_straight_wires_are_not_swap():
    rep = verify_gate(straight_wires(2), swap(2))
    assert not rep.feed_forwardable
    statuses = {tuple(r.input): r.status for r in rep.truth_table}
    assert statuses[(0, 0)] == "ok" and statuses[(1, 1)] == "ok"
    assert statuses[(0, 1)] == "wrong" and statuses[(1, 0)] == "wrong"
    # two of the four terms overlap the target: (2 * 1/2)^2 / 4
    assert rep.fidelity == pytest.approx(0.25)


def test_perturbed_cnot_fails_verification():
    w = [1.0] * len(CNOT_EDGES)
    w[3] = 0.5  # unbalances the |t=1> branch
    rep = verify_gate(cnot_graph(w), cx(2, 2))
    assert rep.fidelity < 1 - 1e-3
    assert not rep.feed_forwardable


def test_missing_edge_leaves_row_unsupported():
    vs = gate_vertices([2])
    g = Graph(vs, (Edge(0, 1, 0, 0, 1),))
    rep = verify_gate(g, identity(2))
    assert rep.truth_table[1].status == "unsupported"
    assert rep.fidelity == pytest.approx(0.5)


def test_zero_state_verifies_as_fidelity_zero():
    vs = gate_vertices([2])
    g = Graph(vs, ())
    rep = verify_gate(g, identity(2))
    assert rep.fidelity == 0 and not rep.feed_forwardable


def _fd_gradient(obj, w, h=1e-6):
    out = np.zeros(len(w), dtype=complex)
    for e in range(len(w)):
        for unit in (1, 1j):
            wp, wm = w.copy(), w.copy()
            wp[e] += unit * h
            wm[e] -= unit * h
            out[e] += unit * (obj.value(wp) - obj.value(wm)) / (2 * h)
    return out


@pytest.mark.parametrize("kind", ["fidelity", "count_rate"])
def test_loss_gradient_matches_finite_differences(kind, rng):
    base = cnot_graph()
    target = target_for_graph(cx(2, 2), base)
    for _ in range(4):
        scale = 0.3 if kind == "count_rate" else 1.0
        w = scale * (rng.normal(size=len(CNOT_EDGES)) + 1j * rng.normal(size=len(CNOT_EDGES)))
        obj = Objective(base, target, kind)
        val, grad = obj.value_and_grad(w)
        assert val == pytest.approx(obj.value(w))
        fd = _fd_gradient(obj, w)
        assert np.linalg.norm(grad - fd) <= 1e-6 * max(1.0, np.linalg.norm(fd))


def test_loss_helpers_and_optimum():
    g = cnot_graph()
    t = target_for_graph(cx(2, 2), g)
    assert loss(g, t) == pytest.approx(0, abs=1e-14)
    assert np.allclose(loss_gradient(g, t), 0, atol=1e-12)
    assert loss(g, t, "count_rate") == 0  # count rate saturates above 1


def _regauge(g, x):
    return g.with_weights([e.weight * np.exp(x[e.a] + x[e.b]) for e in g.edges])


def test_gauge_normalize_undoes_vertex_scaling(rng):
    g = cnot_graph()
    t = target_for_graph(cx(2, 2), g)
    skewed = _regauge(g, rng.uniform(-3, 3, g.n))
    assert bounded_count_rate(skewed, t) == pytest.approx(4)
    h = gauge_normalize(skewed)
    assert np.abs(h.weights).max() <= 1 + 1e-12
    assert verify_gate(h, cx(2, 2)).fidelity == pytest.approx(1, abs=1e-12)
    # all-ones is optimal here: some matching saturates every constraint
    assert np.allclose(np.abs(h.weights), 1)


def test_gauge_normalize_keeps_zero_edges_and_empty_graphs():
    g = cnot_graph([1.0] * 8 + [0.0])
    assert gauge_normalize(g).weights[-1] == 0
    empty = Graph(gate_vertices([2]), ())
    assert gauge_normalize(empty) == empty


def test_rate_penalty_gradient_and_scale_invariance(rng):
    g = cnot_graph()
    obj = Objective(g, target_for_graph(cx(2, 2), g))
    w = rng.normal(size=len(CNOT_EDGES)) + 1j * rng.normal(size=len(CNOT_EDGES))
    val, grad = obj.rate_penalty(w)
    assert obj.rate_penalty(3.7j * w)[0] == pytest.approx(val)
    fd = np.zeros(len(w), dtype=complex)
    for e in range(len(w)):
        for unit in (1, 1j):
            wp, wm = w.copy(), w.copy()
            wp[e] += unit * 1e-6
            wm[e] -= unit * 1e-6
            fd[e] += unit * (obj.rate_penalty(wp)[0] - obj.rate_penalty(wm)[0]) / 2e-6
    assert np.linalg.norm(grad - fd) <= 1e-6 * np.linalg.norm(fd)


def test_limit_solution_has_vanishing_bounded_rate():
    # a CX(2,3) fit that reaches the gate only as some weights diverge
    g = graph_from_json((DATA / "cx23_limit.json").read_text())
    rep = verify_gate(g, cx(2, 3), tol=1e-9)
    assert rep.feed_forwardable
    assert bounded_count_rate(g, target_for_graph(cx(2, 3), g)) < 1e-4


def test_report_json_keys():
    rep = verify_gate(cnot_graph(), cx(2, 2))
    doc = rep.to_dict()
    assert set(doc["truth_table"][0]) == {"input", "expected", "observed",
                                          "conditional_fidelity", "pass", "status"}
    assert doc["feed_forwardable"] is True
