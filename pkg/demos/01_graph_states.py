"""From edges to a post-selected state.

Every perfect matching of a colored graph is one way for all detectors to
click at once. Its amplitude is the product of the edge weights, and the
modes it lands on are the edge colors at each vertex. Summing over matchings
gives the state. This script builds a few small graphs and prints their
states next to a brute-force recomputation.
"""

import numpy as np

from photongates import Edge, Graph, Vertex, enumerate_pms, graph_state, oracle_state

four = tuple(Vertex.ancilla(i) for i in range(4))

# Two independent pairs: |00> on (0, 1) and |00> on (2, 3).
pairs = Graph(four, (Edge(0, 1, 0, 0, 1), Edge(2, 3, 0, 0, 1)))
print("two pair sources:", graph_state(pairs))

# Add a second color on each pair and the state becomes a product of Bell pairs.
bell = Graph(four, pairs.edges + (Edge(0, 1, 1, 1, 1), Edge(2, 3, 1, 1, 1)))
print("two Bell pairs:  ", graph_state(bell))

# A 4-cycle with one negative weight: the two matchings cancel.
cycle = Graph(four, (Edge(0, 1, 0, 0, 1), Edge(2, 3, 0, 0, 1),
                     Edge(1, 2, 0, 0, 1), Edge(0, 3, 0, 0, -1)))
print("4-cycle matchings:", enumerate_pms(cycle))
print("4-cycle state is zero:", graph_state(cycle).is_zero)

# The fast path and the subset-by-subset oracle agree on a random graph.
rng = np.random.default_rng(3)
edges = []
seen = set()
while len(edges) < 12:
    a, b = sorted(rng.choice(6, 2, replace=False).tolist())
    ma, mb = rng.integers(2, size=2).tolist()
    if (a, b, ma, mb) not in seen:
        seen.add((a, b, ma, mb))
        edges.append(Edge(a, b, ma, mb, complex(rng.normal(), rng.normal())))
g = Graph(tuple(Vertex.ancilla(i) for i in range(6)), tuple(edges))
fast, slow = graph_state(g), oracle_state(g)
print(f"random 6-vertex graph: {len(fast)} terms, agrees with oracle: {fast.allclose(slow)}")
