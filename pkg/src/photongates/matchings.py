"""Perfect matchings and the post-selected state of a graph.

Every perfect matching of a colored graph is one way for all detectors to
click at once. Its amplitude is the product of the member edge weights and
it contributes the basis term in which each vertex carries the mode of its
matched edge endpoint. Matchings landing on the same term interfere.

Two evaluation paths live here:

* :func:`enumerate_pms` / :func:`graph_state` / :func:`state_gradient`, the
  readable API returning :class:`Ket` objects;
* :class:`MatchingTable`, a compiled form of the same sum used in the
  optimizer's inner loop (numpy, all matchings at once).

:func:`oracle_state` is a deliberately naive subset enumeration used only
to check the other two.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

from .graph import Graph

PRUNE_TOL = 1e-14
ORACLE_MAX_EDGES = 24

PerfectMatching = tuple[int, ...]


class OracleSizeError(ValueError):
    pass


@dataclass
class Ket:
    """Sparse state: mode-assignment tuple (one mode per vertex) -> amplitude."""

    terms: dict[tuple[int, ...], complex]
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        self.dims = tuple(self.dims)
        for key in self.terms:
            if len(key) != len(self.dims) or any(
                    not (0 <= m < d) for m, d in zip(key, self.dims)):
                raise ValueError(f"basis term {key} does not fit dims {self.dims}")

    @classmethod
    def from_terms(cls, terms: Mapping[tuple[int, ...], complex] | Iterable,
                   dims: Iterable[int], tol: float = PRUNE_TOL) -> Ket:
        acc: dict[tuple[int, ...], complex] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for key, amp in items:
            key = tuple(int(m) for m in key)
            acc[key] = acc.get(key, 0j) + complex(amp)
        return cls({k: a for k, a in acc.items() if abs(a) >= tol}, tuple(dims))

    def __len__(self) -> int:
        return len(self.terms)

    def __getitem__(self, key: tuple[int, ...]) -> complex:
        return self.terms.get(tuple(key), 0j)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.terms)

    def items(self):
        return self.terms.items()

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def norm2(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.terms.values()))

    def norm(self) -> float:
        return float(np.sqrt(self.norm2()))

    def inner(self, other: Ket) -> complex:
        """<self|other>."""
        if self.dims != other.dims:
            raise ValueError(f"layouts differ: {self.dims} vs {other.dims}")
        small, big = (self, other) if len(self) <= len(other) else (other, self)
        s = sum(np.conj(self[k]) * other[k] for k in small.terms if k in big.terms)
        return complex(s)

    def scaled(self, factor: complex) -> Ket:
        return Ket.from_terms({k: factor * a for k, a in self.terms.items()}, self.dims)

    def normalized(self) -> Ket:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("cannot normalize the zero ket")
        return Ket({k: a / n for k, a in self.terms.items()}, self.dims)

    def permuted(self, perm: Iterable[int]) -> Ket:
        """Relabel vertex ``v`` as ``perm[v]``."""
        perm = list(perm)
        inv = np.argsort(perm)
        dims = tuple(self.dims[i] for i in inv)
        return Ket({tuple(key[i] for i in inv): a for key, a in self.terms.items()}, dims)

    def allclose(self, other: Ket, atol: float = 1e-12) -> bool:
        if self.dims != other.dims:
            return False
        keys = set(self.terms) | set(other.terms)
        return all(abs(self[k] - other[k]) <= atol for k in keys)

    def sorted_terms(self) -> list[tuple[tuple[int, ...], complex]]:
        """Terms by decreasing magnitude, then lexicographically."""
        return sorted(self.terms.items(), key=lambda kv: (-round(abs(kv[1]), 12), kv[0]))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for key, a in self.sorted_terms():
            parts.append(f"({a.real:+.6g}{a.imag:+.6g}j)|{''.join(map(str, key))}>")
        return " ".join(parts)


def _incidence(g: Graph) -> list[list[int]]:
    inc: list[list[int]] = [[] for _ in range(g.n)]
    for k, e in enumerate(g.edges):
        inc[e.a].append(k)
        inc[e.b].append(k)
    for v, ks in enumerate(inc):
        ks.sort(key=lambda k: (g.edges[k].b if g.edges[k].a == v else g.edges[k].a,
                               g.edges[k].mode_a, g.edges[k].mode_b, k))
    return inc


def enumerate_pms(g: Graph) -> list[PerfectMatching]:
    """All colored perfect matchings as sorted tuples of edge indices.

    Backtracking always extends the lowest uncovered vertex. The result is
    sorted lexicographically so the order does not depend on edge listing.
    """
    n = g.n
    if n % 2:
        return []
    inc = _incidence(g)
    covered = [False] * n
    chosen: list[int] = []
    out: list[PerfectMatching] = []

    def extend(start: int) -> None:
        v = start
        while v < n and covered[v]:
            v += 1
        if v == n:
            out.append(tuple(sorted(chosen)))
            return
        covered[v] = True
        for k in inc[v]:
            e = g.edges[k]
            u = e.b if e.a == v else e.a
            if covered[u]:
                continue
            covered[u] = True
            chosen.append(k)
            extend(v + 1)
            chosen.pop()
            covered[u] = False
        covered[v] = False

    extend(0)
    out.sort()
    return out


def _assignment(g: Graph, pm: Iterable[int]) -> tuple[int, ...]:
    modes = [0] * g.n
    for k in pm:
        e = g.edges[k]
        modes[e.a] = e.mode_a
        modes[e.b] = e.mode_b
    return tuple(modes)


def graph_state(g: Graph) -> Ket:
    """Unnormalized post-selected state: coherent sum over perfect matchings."""
    return MatchingTable(g).ket(np.array(g.weights, dtype=complex))


def pm_state(g: Graph) -> Ket:
    """Same sum as :func:`graph_state`, assembled from :func:`enumerate_pms`."""
    acc: dict[tuple[int, ...], complex] = {}
    for pm in enumerate_pms(g):
        amp = complex(np.prod([g.edges[k].weight for k in pm]))
        key = _assignment(g, pm)
        acc[key] = acc.get(key, 0j) + amp
    return Ket.from_terms(acc, g.dims)


def oracle_state(g: Graph) -> Ket:
    """Brute-force state: test every edge subset for being a perfect matching.

    Only subsets of size n/2 can cover n vertices exactly once, so those are
    the only ones inspected. Refuses graphs with more than 24 edges.
    """
    m = len(g.edges)
    if m > ORACLE_MAX_EDGES:
        raise OracleSizeError(f"{m} edges exceeds the oracle limit of {ORACLE_MAX_EDGES}")
    n = g.n
    acc: dict[tuple[int, ...], complex] = {}
    if n % 2:
        return Ket({}, g.dims)
    for subset in itertools.combinations(range(m), n // 2):
        hits = [0] * n
        for k in subset:
            hits[g.edges[k].a] += 1
            hits[g.edges[k].b] += 1
        if any(h != 1 for h in hits):
            continue
        amp = 1 + 0j
        modes = [0] * n
        for k in subset:
            e = g.edges[k]
            amp *= e.weight
            modes[e.a] = e.mode_a
            modes[e.b] = e.mode_b
        acc[tuple(modes)] = acc.get(tuple(modes), 0j) + amp
    return Ket.from_terms(acc, g.dims)


def state_gradient(g: Graph, e: int) -> Ket:
    """Exact derivative of the state with respect to the weight of edge ``e``.

    The state is linear in each single weight, so this is the sum over the
    matchings that contain ``e`` with ``w_e`` left out of the product.
    """
    if not 0 <= e < len(g.edges):
        raise IndexError(f"edge index {e} out of range for {len(g.edges)} edges")
    table = MatchingTable(g)
    w = np.array(g.weights, dtype=complex)
    return table.derivative_ket(w, e)


def _structural_matchings(n: int, pairs: list[tuple[int, int]]) -> list[tuple[int, ...]]:
    """Perfect matchings of the color-blind simple graph, as pair indices."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for p, (a, b) in enumerate(pairs):
        adj[a].append((b, p))
        adj[b].append((a, p))
    covered = [False] * n
    chosen: list[int] = []
    out: list[tuple[int, ...]] = []

    def extend(v: int) -> None:
        while v < n and covered[v]:
            v += 1
        if v == n:
            out.append(tuple(chosen))
            return
        covered[v] = True
        for u, p in adj[v]:
            if not covered[u]:
                covered[u] = True
                chosen.append(p)
                extend(v + 1)
                chosen.pop()
                covered[u] = False
        covered[v] = False

    if n % 2 == 0:
        extend(0)
    return out


@dataclass
class MatchingTable:
    """All colored perfect matchings of a graph, flattened into arrays.

    ``term_edges[j]`` lists the edges of matching ``j`` and ``term_key[j]``
    indexes the basis term it lands on (``keys[term_key[j]]``). The weights
    are not baked in, so one table serves a whole optimization run.
    """

    graph: Graph
    term_edges: np.ndarray = field(init=False)
    term_key: np.ndarray = field(init=False)
    keys: list[tuple[int, ...]] = field(init=False)
    codes: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        g = self.graph
        n = g.n
        dims = g.dims
        strides = np.ones(n, dtype=np.int64)
        for v in range(n - 2, -1, -1):
            strides[v] = strides[v + 1] * dims[v + 1]
        self.strides = strides
        by_pair: dict[tuple[int, int], list[int]] = {}
        for k, e in enumerate(g.edges):
            by_pair.setdefault((e.a, e.b), []).append(k)
        pairs = sorted(by_pair)
        contrib = np.array([e.mode_a * strides[e.a] + e.mode_b * strides[e.b]
                            for e in g.edges], dtype=np.int64)
        half = n // 2
        blocks = []
        for sm in _structural_matchings(n, pairs):
            lists = [np.array(by_pair[pairs[p]], dtype=np.int64) for p in sm]
            grids = np.meshgrid(*lists, indexing="ij") if lists else []
            blocks.append(np.stack([gr.ravel() for gr in grids], axis=1)
                          if lists else np.zeros((1, 0), dtype=np.int64))
        if n % 2 or not blocks:
            self.term_edges = np.zeros((0, half), dtype=np.int64)
        else:
            self.term_edges = np.concatenate(blocks, axis=0)
        raw = (contrib[self.term_edges].sum(axis=1) if self.term_edges.size
               else np.zeros(len(self.term_edges), dtype=np.int64))
        self.codes, self.term_key = np.unique(raw, return_inverse=True)
        self.term_key = self.term_key.ravel()
        self.keys = [self._decode(int(c)) for c in self.codes]

    def _decode(self, code: int) -> tuple[int, ...]:
        dims = self.graph.dims
        return tuple(int(code // int(s)) % d for s, d in zip(self.strides, dims))

    @property
    def n_terms(self) -> int:
        return len(self.term_edges)

    def encode(self, key: Iterable[int]) -> int:
        return int(np.dot(np.asarray(tuple(key), dtype=np.int64), self.strides))

    def term_products(self, w: np.ndarray) -> np.ndarray:
        if self.term_edges.shape[1] == 0:
            return np.ones(self.n_terms, dtype=complex)
        return np.prod(w[self.term_edges], axis=1)

    def amplitudes(self, w: np.ndarray) -> np.ndarray:
        """Amplitude per entry of ``keys`` for complex weights ``w``."""
        p = self.term_products(w)
        size = len(self.keys)
        return (np.bincount(self.term_key, weights=p.real, minlength=size)
                + 1j * np.bincount(self.term_key, weights=p.imag, minlength=size))

    def ket(self, w: np.ndarray, tol: float = PRUNE_TOL) -> Ket:
        amps = self.amplitudes(w)
        return Ket({k: complex(a) for k, a in zip(self.keys, amps) if abs(a) >= tol},
                   self.graph.dims)

    def _products_except(self, w: np.ndarray) -> np.ndarray:
        """Row-wise product of all weights but the one in each column."""
        vals = w[self.term_edges]
        t, m = vals.shape
        prefix = np.ones((t, m), dtype=complex)
        suffix = np.ones((t, m), dtype=complex)
        for i in range(1, m):
            prefix[:, i] = prefix[:, i - 1] * vals[:, i - 1]
            suffix[:, m - 1 - i] = suffix[:, m - i] * vals[:, m - i]
        return prefix * suffix

    def pullback(self, w: np.ndarray, cotangent: np.ndarray) -> np.ndarray:
        """``sum_k conj(cotangent[k]) * d amp_k / d w_e`` for every edge ``e``."""
        n_edges = len(self.graph.edges)
        if self.n_terms == 0 or self.term_edges.shape[1] == 0:
            return np.zeros(n_edges, dtype=complex)
        others = self._products_except(w)
        c = np.conj(cotangent)[self.term_key][:, None] * others
        flat = self.term_edges.ravel()
        return (np.bincount(flat, weights=c.real.ravel(), minlength=n_edges)
                + 1j * np.bincount(flat, weights=c.imag.ravel(), minlength=n_edges))

    def derivative_ket(self, w: np.ndarray, e: int) -> Ket:
        if self.n_terms == 0:
            return Ket({}, self.graph.dims)
        rows, cols = np.nonzero(self.term_edges == e)
        others = self._products_except(w)[rows, cols]
        acc: dict[tuple[int, ...], complex] = {}
        for key_idx, val in zip(self.term_key[rows], others):
            key = self.keys[key_idx]
            acc[key] = acc.get(key, 0j) + complex(val)
        return Ket.from_terms(acc, self.graph.dims)
