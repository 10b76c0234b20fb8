import numpy as np
import pytest

from photongates.graph import Edge, Graph, Vertex, gate_vertices


def random_graph(rng, n_vertices, n_edges, max_dim=3, complex_weights=True):
    """Random valid graph with distinct colored edges and nonzero weights."""
    dims = [int(rng.integers(2, max_dim + 1)) for _ in range(n_vertices)]
    vertices = [Vertex.ancilla(i, 0, d) for i, d in enumerate(dims)]
    keys = set()
    edges = []
    tries = 0
    while len(edges) < n_edges and tries < 50 * n_edges + 100:
        tries += 1
        a, b = sorted(rng.choice(n_vertices, 2, replace=False).tolist())
        ma, mb = int(rng.integers(dims[a])), int(rng.integers(dims[b]))
        if (a, b, ma, mb) in keys:
            continue
        keys.add((a, b, ma, mb))
        w = rng.normal() + (1j * rng.normal() if complex_weights else 0)
        edges.append(Edge(a, b, ma, mb, complex(w)))
    return Graph(tuple(vertices), tuple(edges))


def complete_single_color(n):
    vertices = tuple(Vertex.ancilla(i) for i in range(n))
    edges = tuple(Edge(a, b, 0, 0, 1) for a in range(n) for b in range(a + 1, n))
    return Graph(vertices, edges)


def swap_crossing(d=2):
    """Inputs 0, 1 wired straight to the opposite outputs 3, 2."""
    vs = gate_vertices([d, d])
    edges = [Edge(0, 3, m, m, 1) for m in range(d)] + [Edge(1, 2, m, m, 1) for m in range(d)]
    return Graph(vs, tuple(edges))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance reporting ------------------------------------------------------
# Tests marked ``criterion(n, text)`` get one PASS/FAIL line in the summary.

_CRITERIA: dict[int, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    n, text = mark.args
    ok = rep.passed and _CRITERIA.get(n, (text, True))[1]
    _CRITERIA[n] = (text, ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        text, ok = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {text}")
