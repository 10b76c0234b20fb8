import itertools
import math

import numpy as np
import pytest

from photongates.graph import Edge, Graph, Vertex, canonicalize_edge
from photongates.matchings import (Ket, MatchingTable, OracleSizeError, enumerate_pms,
                                   graph_state, oracle_state, pm_state, state_gradient)

from conftest import complete_single_color, random_graph


def ancillas(n, dim=2):
    return tuple(Vertex.ancilla(i, 0, dim) for i in range(n))


def count_pairings(items):
    """Number of ways to split ``items`` into unordered pairs, by recursion."""
    if not items:
        return 1
    rest = items[1:]
    return sum(count_pairings(rest[:i] + rest[i + 1:]) for i in range(len(rest)))


def subset_matchings(g):
    """Perfect matchings by checking every one of the 2^|E| edge subsets."""
    out = []
    for r in range(len(g.edges) + 1):
        for subset in itertools.combinations(range(len(g.edges)), r):
            hits = [0] * g.n
            for k in subset:
                hits[g.edges[k].a] += 1
                hits[g.edges[k].b] += 1
            if all(h == 1 for h in hits):
                out.append(subset)
    return sorted(out)


def test_single_edge_has_one_matching():
    g = Graph(ancillas(2), (Edge(0, 1, 0, 0, 1),))
    assert enumerate_pms(g) == [(0,)]


def test_complete_four_vertex_graph_has_three_matchings():
    g = complete_single_color(4)
    assert len(subset_matchings(g)) == 3
    assert enumerate_pms(g) == subset_matchings(g)


def test_parallel_colored_edges_are_separate_matchings():
    g = Graph(ancillas(2), (Edge(0, 1, 0, 0, 1), Edge(0, 1, 1, 1, 1)))
    assert enumerate_pms(g) == [(0,), (1,)]


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_complete_graph_matching_count(n):
    expected = count_pairings(list(range(2 * n)))
    assert expected == math.prod(range(1, 2 * n, 2))
    assert len(enumerate_pms(complete_single_color(2 * n))) == expected


def test_enumeration_order_is_lexicographic(rng):
    g = random_graph(rng, 6, 14)
    pms = enumerate_pms(g)
    assert pms == sorted(pms)
    assert pms == subset_matchings(g)


def test_odd_graph_has_no_matchings():
    g = Graph(ancillas(3), (Edge(0, 1, 0, 0, 1), Edge(1, 2, 0, 0, 1)))
    assert enumerate_pms(g) == []
    assert graph_state(g).is_zero
    assert oracle_state(g).is_zero


def test_parallel_edges_state():
    g = Graph(ancillas(2), (Edge(0, 1, 0, 0, 1), Edge(0, 1, 1, 1, 1)))
    psi = graph_state(g)
    assert psi.terms == {(0, 0): 1, (1, 1): 1}


def test_destructive_interference_on_four_cycle():
    edges = (Edge(0, 1, 0, 0, 1), Edge(2, 3, 0, 0, 1), Edge(1, 2, 0, 0, 1), Edge(0, 3, 0, 0, -1))
    g = Graph(ancillas(4), edges)
    assert len(enumerate_pms(g)) == 2
    assert oracle_state(g).is_zero
    assert graph_state(g).is_zero
    assert graph_state(g)[(0, 0, 0, 0)] == 0


def test_empty_edge_list_gives_zero_from_both_paths():
    g = Graph(ancillas(2), ())
    assert graph_state(g).is_zero and oracle_state(g).is_zero


def test_oracle_size_guard():
    g = complete_single_color(8)  # 28 edges
    with pytest.raises(OracleSizeError):
        oracle_state(g)


def test_oracle_matches_on_random_graphs():
    rng = np.random.default_rng(7)
    for _ in range(30):
        n = int(rng.choice([2, 4, 6, 8]))
        g = random_graph(rng, n, int(rng.integers(1, 21)))
        assert graph_state(g).allclose(oracle_state(g), atol=1e-12)
        assert pm_state(g).allclose(oracle_state(g), atol=1e-12)


def test_state_gradient_of_single_edge():
    g = Graph(ancillas(2), (Edge(0, 1, 1, 0, 3 - 1j),))
    assert state_gradient(g, 0).terms == {(1, 0): 1}


def test_gradient_of_edge_in_no_matching_is_zero():
    # edge 2 joins 0 and 1 again in a color that leaves 2, 3 uncovered
    g = Graph(ancillas(4), (Edge(0, 1, 0, 0, 1), Edge(2, 3, 0, 0, 1), Edge(0, 2, 1, 1, 1)))
    assert state_gradient(g, 2).is_zero


def test_state_gradient_index_checked():
    g = Graph(ancillas(2), (Edge(0, 1, 0, 0, 1),))
    with pytest.raises(IndexError):
        state_gradient(g, 1)


def _ket_vector(ket, keys):
    return np.array([ket[k] for k in keys])


def test_state_gradient_matches_finite_differences(rng):
    h = 1e-5
    for _ in range(5):
        g = random_graph(rng, 6, 18)
        w = np.array(g.weights)
        keys = sorted(set(graph_state(g).terms) | {k for e in range(len(w))
                                                   for k in state_gradient(g, e).terms})
        for e in range(len(w)):
            exact = _ket_vector(state_gradient(g, e), keys)
            if not np.any(exact):
                continue
            for step in (h, 1j * h):
                wp, wm = w.copy(), w.copy()
                wp[e] += step
                wm[e] -= step
                fd = (_ket_vector(graph_state(g.with_weights(wp)), keys)
                      - _ket_vector(graph_state(g.with_weights(wm)), keys)) / (2 * h)
                # d/dRe = D, d/dIm = iD for a holomorphic amplitude
                want = exact * (1 if step == h else 1j)
                assert np.linalg.norm(fd - want) <= 1e-6 * np.linalg.norm(want)


def test_state_is_affine_in_each_weight(rng):
    g = random_graph(rng, 6, 16)
    w = np.array(g.weights)
    for e in range(len(w)):
        kets = []
        for val in (0, 1, 2):
            w2 = w.copy()
            w2[e] = val
            kets.append(graph_state(g.with_weights(w2)))
        keys = set().union(*(k.terms for k in kets))
        for key in keys:
            a0, a1, a2 = (k[key] for k in kets)
            assert abs((a2 - a1) - (a1 - a0)) < 1e-12
            assert abs((a1 - a0) - state_gradient(g, e)[key]) < 1e-12


def test_permutation_equivariance(rng):
    for _ in range(5):
        g = random_graph(rng, 6, 14)
        perm = rng.permutation(g.n).tolist()
        vertices = sorted((Vertex.ancilla(perm[v.id], 0, v.dim) for v in g.vertices),
                          key=lambda v: v.id)
        edges = [canonicalize_edge(perm[e.a], perm[e.b], e.mode_a, e.mode_b, e.weight)
                 for e in g.edges]
        h = Graph(tuple(vertices), tuple(edges))
        assert graph_state(h).allclose(graph_state(g).permuted(perm), atol=1e-12)


def test_matching_table_counts_colored_matchings(rng):
    g = random_graph(rng, 8, 20)
    assert MatchingTable(g).n_terms == len(enumerate_pms(g))


def test_ket_basics():
    k = Ket.from_terms({(0, 1): 3, (1, 0): 4j, (1, 1): 1e-16}, (2, 2))
    assert len(k) == 2
    assert k.norm() == pytest.approx(5)
    assert k.normalized().norm() == pytest.approx(1)
    assert k.inner(k) == pytest.approx(25)
    with pytest.raises(ValueError):
        Ket({(0, 2): 1}, (2, 2))
