"""Scoring a graph against a gate: fidelity, count rate and verification."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .gates import GateSpec, TargetState, apply_gate, basis_tuples, spec_for_graph, target_for_graph
from .graph import Graph
from .matchings import Ket, MatchingTable

DEFAULT_TOL = 1e-6
LOSS_KINDS = ("fidelity", "count_rate")


class ZeroStateError(ValueError):
    """The graph has no perfect matching with nonzero weight."""


def fidelity(psi: Ket, target: Ket) -> float:
    """|<t|psi>|^2 / (<psi|psi> <t|t>)."""
    n_psi = psi.norm2()
    if n_psi == 0:
        raise ZeroStateError("state is zero: the graph has no contributing perfect matching")
    n_t = target.norm2()
    if n_t == 0:
        raise ZeroStateError("target is zero")
    return min(1.0, abs(target.inner(psi)) ** 2 / (n_psi * n_t))


def count_rate(psi: Ket, target: Ket) -> float:
    """|<t|psi>|^2 with ``t`` normalized and ``psi`` left as is."""
    n_t = target.norm2()
    if n_t == 0:
        raise ZeroStateError("target is zero")
    return abs(target.inner(psi)) ** 2 / n_t


class Objective:
    """Loss of a fixed topology as a function of its complex weights.

    ``kind="fidelity"`` gives ``1 - F``, ``kind="count_rate"`` gives
    ``1 - min(C, 1)``. Gradients are returned as ``dL/dRe(w) + i dL/dIm(w)``.
    """

    def __init__(self, g: Graph, target: TargetState | Ket, kind: str = "fidelity",
                 table: MatchingTable | None = None):
        if kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {kind!r}")
        self.kind = kind
        self.graph = g
        self.table = table or MatchingTable(g)
        t = target.ket if isinstance(target, TargetState) else target
        if t.dims != g.dims:
            raise ValueError(f"target layout {t.dims} does not match graph {g.dims}")
        self.t_norm2 = t.norm2()
        self.t_vec = np.array([t[k] for k in self.table.keys], dtype=complex)

    def _pieces(self, w: np.ndarray):
        psi = self.table.amplitudes(w)
        s = np.vdot(self.t_vec, psi)
        n = float(np.vdot(psi, psi).real)
        return psi, s, n

    def value(self, w: np.ndarray) -> float:
        w = np.asarray(w, dtype=complex)
        psi, s, n = self._pieces(w)
        if self.kind == "fidelity":
            if n == 0:
                raise ZeroStateError("state is zero")
            return 1.0 - abs(s) ** 2 / (n * self.t_norm2)
        return 1.0 - min(abs(s) ** 2 / self.t_norm2, 1.0)

    def value_and_grad(self, w: np.ndarray) -> tuple[float, np.ndarray]:
        w = np.asarray(w, dtype=complex)
        psi, s, n = self._pieces(w)
        T = self.t_norm2
        if self.kind == "fidelity":
            if n == 0:
                raise ZeroStateError("state is zero")
            s2 = abs(s) ** 2
            loss = 1.0 - s2 / (n * T)
            # dL/d conj(psi_k)
            cot = -(s * self.t_vec * n - s2 * psi) / (n * n * T)
        else:
            c = abs(s) ** 2 / T
            loss = 1.0 - min(c, 1.0)
            cot = -(s * self.t_vec) / T if c < 1.0 else np.zeros_like(psi)
        grad = 2.0 * np.conj(self.table.pullback(w, cot))
        return float(loss), grad

    def rate_penalty(self, w: np.ndarray) -> tuple[float, np.ndarray]:
        """``-log C(w / |w|)`` and its gradient.

        Fidelity does not see the overall scale, so a fit can drift toward
        weights that diverge relative to each other. This term rewards count
        rate at a fixed weight norm. ``C`` is homogeneous of degree ``n`` in
        ``w`` (``n/2`` edges per matching, squared), which gives
        ``-log C(w) + (n/2) log |w|^2``.
        """
        w = np.asarray(w, dtype=complex)
        psi = self.table.amplitudes(w)
        s = np.vdot(self.t_vec, psi)
        c = max(abs(s) ** 2 / self.t_norm2, 1e-300)
        n2 = float(np.vdot(w, w).real)
        half = self.graph.n // 2
        grad_c = 2.0 * np.conj(self.table.pullback(w, s * self.t_vec / self.t_norm2))
        value = -math.log(c) + half * math.log(n2)
        return value, -grad_c / c + half * 2.0 * w / n2


def loss(g: Graph, target: TargetState | Ket, kind: str = "fidelity") -> float:
    return Objective(g, target, kind).value(np.array(g.weights, dtype=complex))


def loss_gradient(g: Graph, target: TargetState | Ket, kind: str = "fidelity") -> np.ndarray:
    """Per-edge ``dL/dRe(w_e) + i dL/dIm(w_e)``."""
    obj = Objective(g, target, kind)
    return obj.value_and_grad(np.array(g.weights, dtype=complex))[1]


def gauge_normalize(g: Graph) -> Graph:
    """Rescale weights vertex by vertex so every |w| <= 1 and the state is largest.

    Each perfect matching covers each vertex once, so multiplying all edges
    at vertex ``v`` by ``exp(x_v)`` multiplies the state by ``exp(x_v)``.
    The best factors solve a linear program in log space: maximize
    ``sum x`` subject to ``x_a + x_b <= -log|w_e|`` for every nonzero edge.
    Fidelity is unchanged.
    """
    from scipy.optimize import linprog

    w = np.array(g.weights, dtype=complex)
    live = np.flatnonzero(w != 0)
    if not len(live):
        return g
    A = np.zeros((len(live), g.n))
    for row, k in enumerate(live):
        A[row, g.edges[k].a] += 1
        A[row, g.edges[k].b] += 1
    # the bounds only bite on vertices without live edges
    sol = linprog(-np.ones(g.n), A_ub=A, b_ub=-np.log(np.abs(w[live])),
                  bounds=[(-300, 300)] * g.n, method="highs")
    if sol.status != 0:
        return g.with_weights(w / np.abs(w).max())
    x = sol.x
    out = w.copy()
    for k in live:
        e = g.edges[k]
        out[k] = w[k] * math.exp(x[e.a] + x[e.b])
    return g.with_weights(out)


def bounded_count_rate(g: Graph, target: TargetState | Ket) -> float:
    """Count rate in the best gauge with every |w| <= 1.

    Exact solutions have a bounded rate of order one; graphs that only
    reach the gate as a limit of diverging weights have a vanishing one.
    """
    t = target.ket if isinstance(target, TargetState) else target
    h = gauge_normalize(g)
    return count_rate(MatchingTable(h).ket(np.array(h.weights, dtype=complex)), t)


@dataclass
class TruthRow:
    input: tuple[int, ...]
    expected: tuple[int, ...]
    observed: tuple[int, ...] | None
    conditional_fidelity: float
    passed: bool
    status: str  # "ok", "wrong", "superposed" or "unsupported"
    phase: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"input": list(self.input), "expected": list(self.expected),
                "observed": None if self.observed is None else list(self.observed),
                "conditional_fidelity": self.conditional_fidelity,
                "pass": self.passed, "status": self.status}


@dataclass
class VerificationReport:
    gate: str
    fidelity: float
    count_rate: float
    truth_table: list[TruthRow]
    feed_forwardable: bool
    ancilla_count: int
    global_phase: complex
    amplitude_spread: float
    tol: float
    edge_count: int = 0

    @property
    def rows_passed(self) -> int:
        return sum(r.passed for r in self.truth_table)

    @property
    def passed(self) -> bool:
        return self.feed_forwardable

    def to_dict(self) -> dict[str, Any]:
        return {
            "gate": self.gate,
            "fidelity": self.fidelity,
            "count_rate": self.count_rate,
            "feed_forwardable": self.feed_forwardable,
            "ancilla_count": self.ancilla_count,
            "edge_count": self.edge_count,
            "global_phase": [self.global_phase.real, self.global_phase.imag],
            "amplitude_spread": self.amplitude_spread,
            "tol": self.tol,
            "rows_passed": self.rows_passed,
            "truth_table": [r.to_dict() for r in self.truth_table],
        }

    def to_json(self, indent: int | None = 1) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def summary(self) -> str:
        lines = [f"gate {self.gate}: fidelity {self.fidelity:.12f}  count rate "
                 f"{self.count_rate:.6g}  ancillas {self.ancilla_count}  "
                 f"edges {self.edge_count}",
                 f"feed-forwardable: {self.feed_forwardable}  "
                 f"({self.rows_passed}/{len(self.truth_table)} rows pass at tol {self.tol:g})"]
        for r in self.truth_table:
            obs = "superposed" if r.observed is None else "".join(map(str, r.observed))
            lines.append(f"  {''.join(map(str, r.input))} -> {''.join(map(str, r.expected))}"
                         f"  observed {obs:>10}  F={r.conditional_fidelity:.9f}  "
                         f"{'pass' if r.passed else r.status.upper()}")
        return "\n".join(lines)


def verify_gate(g: Graph, spec: GateSpec, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Check ``g`` against ``spec`` as a heralded, feed-forward gate.

    The full state (inputs, outputs and ancillas) is compared with the Choi
    target, then each input basis tuple is checked on its own: the state is
    conditioned on the inputs and must be the expected output with every
    ancilla in its heralding mode. Raises ``LayoutError`` when the graph's
    inputs/outputs do not fit the gate.
    """
    target = target_for_graph(spec, g)
    spec = spec_for_graph(spec, g)
    psi = MatchingTable(g).ket(np.array(g.weights, dtype=complex))
    ins, outs, ancs = g.inputs, g.outputs, g.ancillas

    if psi.is_zero:
        fid, phase = 0.0, 1 + 0j
    else:
        fid = fidelity(psi, target.ket)
        ov = target.ket.inner(psi)
        phase = ov / abs(ov) if abs(ov) > 0 else 1 + 0j
    cr = count_rate(psi, target.ket)

    by_input: dict[tuple[int, ...], list[tuple[tuple[int, ...], complex]]] = {}
    for key, amp in psi.items():
        by_input.setdefault(tuple(key[i] for i in ins), []).append((key, amp))

    rows = []
    target_amps = []
    for x in basis_tuples(spec.input_dims):
        y = apply_gate(spec, x)
        want = [0] * g.n
        for v, m in zip(ins, x):
            want[v] = m
        for v, m in zip(outs, y):
            want[v] = m
        for v, m in zip(ancs, spec.ancilla_modes):
            want[v] = m
        want_key = tuple(want)
        terms = by_input.get(x, [])
        total = sum(abs(a) ** 2 for _, a in terms)
        target_amps.append(abs(psi[want_key]))
        if total == 0:
            rows.append(TruthRow(x, y, None, 0.0, False, "unsupported"))
            continue
        cf = min(1.0, abs(psi[want_key]) ** 2 / total)
        best_key, best_amp = max(terms, key=lambda kv: (abs(kv[1]), kv[0]))
        observed = None
        if abs(best_amp) ** 2 / total > 0.5:
            anc_ok = all(best_key[v] == m for v, m in zip(ancs, spec.ancilla_modes))
            observed = tuple(best_key[v] for v in outs) if anc_ok else None
        ok = cf >= 1 - tol
        status = "ok" if ok else ("superposed" if observed is None else "wrong")
        a = psi[want_key]
        rows.append(TruthRow(x, y, observed, cf, ok, status,
                             math.degrees(math.atan2(a.imag, a.real)) if a else None))

    amax = max(target_amps) if target_amps else 0.0
    spread = (amax - min(target_amps)) / amax if amax > 0 else 1.0
    ff = fid >= 1 - tol and all(r.passed for r in rows)
    return VerificationReport(spec.name, fid, cr, rows, ff, len(ancs), complex(phase),
                              float(spread), tol, len(g.edges))
