"""Searching for gate graphs.

The search starts from a complete colored graph, fits the edge weights to
the gate's Choi state by gradient descent from random starting points and
then prunes: the weakest edge is removed, the rest is re-fitted, and the
removal is kept only if the fit stays good. Everything is driven by seeded
numpy generators so a run is reproducible from its configuration.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .gates import GateSpec, TargetState, target_for_graph
from .graph import Edge, Graph, gate_vertices
from .matchings import MatchingTable
from .objective import (Objective, VerificationReport, ZeroStateError, bounded_count_rate,
                        gauge_normalize, verify_gate)

log = logging.getLogger(__name__)

GRAD_TOL = 1e-9
ZERO_WEIGHT = 1e-12
SNAP_VALUES = tuple(
    complex(v) for v in
    [0, 1, -1, 1 / math.sqrt(2), -1 / math.sqrt(2), 0.5, -0.5,
     1j, -1j, 1j / math.sqrt(2), -1j / math.sqrt(2), 0.5j, -0.5j])


class DiscoveryError(RuntimeError):
    pass


class UnmatchableTopology(DiscoveryError):
    """No perfect matching can carry weight, whatever the weights are."""


class NoSolutionFound(DiscoveryError):
    def __init__(self, message: str, best_loss: float):
        super().__init__(f"{message} (best loss {best_loss:.3g})")
        self.best_loss = best_loss


@dataclass(frozen=True)
class OptimizerConfig:
    loss_kind: str = "fidelity"
    search_threshold: float = 1e-3
    polish_threshold: float = 1e-6
    max_restarts: int = 50
    steps: int = 2000
    polish_steps: int = 20000
    init_scale: float = 1.0
    real_only: bool = False
    seed: int = 0
    snap_weights: bool = False
    method: str = "gd"
    learning_rate: float = 0.1
    # vertex pairs that may not share an edge
    forbid: tuple[tuple[int, int], ...] = ()
    # only seed ancilla edges in the ancilla's heralding mode
    herald_only: bool = False
    # weight of the count-rate term in fits (0 turns it off)
    rate_weight: float = 0.0
    # pruning keeps a removal only if the bounded count rate stays above this
    min_rate: float = 0.0

    def __post_init__(self) -> None:
        if not (self.search_threshold >= 0 and self.polish_threshold > 0):
            raise ValueError("thresholds must be positive")
        if self.polish_threshold > self.search_threshold and self.search_threshold > 0:
            raise ValueError("polish threshold must not exceed the search threshold")
        if self.rate_weight < 0 or self.min_rate < 0:
            raise ValueError("rate_weight and min_rate must be non-negative")
        object.__setattr__(self, "forbid",
                           tuple(tuple(sorted(map(int, p))) for p in self.forbid))

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


# -- optimizers --------------------------------------------------------------
# An optimizer takes (value_and_grad, x0, steps, stop_loss, lr) over a real
# parameter vector and returns (best_x, best_loss).

Optimizer = Callable[[Callable, np.ndarray, int, float, float], tuple[np.ndarray, float]]


def adaptive_descent(fg, x0, steps, stop_loss=0.0, lr=0.1):
    """Gradient descent; the step grows 1.1x after a success and halves otherwise."""
    x = np.array(x0, dtype=float)
    f, g = fg(x)
    for _ in range(steps):
        if f < stop_loss or np.linalg.norm(g) < GRAD_TOL:
            break
        trial = x - lr * g
        try:
            ft, gt = fg(trial)
        except ZeroStateError:
            ft = math.inf
        if ft < f:
            x, f, g = trial, ft, gt
            lr *= 1.1
        else:
            lr *= 0.5
            if lr < 1e-300:
                break
    return x, f


def lbfgs(fg, x0, steps, stop_loss=0.0, lr=0.1):
    from scipy.optimize import minimize

    best = [np.array(x0, dtype=float), math.inf]

    def fun(x):
        try:
            f, g = fg(x)
        except ZeroStateError:
            return 1.0, np.zeros_like(x)
        if f < best[1]:
            best[0], best[1] = np.array(x), f
        return f, g

    def stop(xk):
        if best[1] < stop_loss:
            raise StopIteration

    fun(best[0])
    if best[1] >= stop_loss:
        try:
            minimize(fun, best[0], jac=True, method="L-BFGS-B", callback=stop,
                     options={"maxiter": steps, "ftol": 1e-16, "gtol": GRAD_TOL})
        except StopIteration:
            pass
    return best[0], best[1]


OPTIMIZERS: dict[str, Optimizer] = {"gd": adaptive_descent, "lbfgs": lbfgs}


def register_optimizer(name: str, fn: Optimizer) -> None:
    OPTIMIZERS[name] = fn


# -- topology ----------------------------------------------------------------

def seed_topology(spec: GateSpec, ancilla_count: int, forbid: Iterable[Sequence[int]] = (),
                  ancilla_modes: Sequence[int] | None = None, ancilla_dim: int = 2,
                  herald_only: bool = False) -> Graph:
    """Complete graph over inputs, outputs and ancillas with every color pair.

    Weights start at zero. ``forbid`` removes whole vertex pairs;
    ``herald_only`` keeps only the heralding mode at ancilla endpoints.
    """
    n = 2 * spec.arity + ancilla_count
    if n % 2:
        raise ValueError(f"{n} vertices: perfect matchings need an even count "
                         f"(ancilla count {ancilla_count} has the wrong parity)")
    vertices = gate_vertices(spec.input_dims, ancilla_count, ancilla_modes, ancilla_dim)
    banned = {tuple(sorted(p)) for p in forbid}

    def modes(v):
        if herald_only and v.fixed_mode is not None:
            return [v.fixed_mode]
        return range(v.dim)

    edges = []
    for va in vertices:
        for vb in vertices[va.id + 1:]:
            if (va.id, vb.id) in banned:
                continue
            for ma in modes(va):
                for mb in modes(vb):
                    edges.append(Edge(va.id, vb.id, ma, mb, 0j))
    return Graph(vertices, tuple(edges), {"gate": spec.name})


def _rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, *stream])


class _Problem:
    """Objective over the real parameter vector of one topology."""

    def __init__(self, g: Graph, target: TargetState, cfg: OptimizerConfig, mu: float = 0.0):
        self.graph = g
        self.cfg = cfg
        self.mu = mu
        self.table = MatchingTable(g)
        if self.table.n_terms == 0:
            raise UnmatchableTopology(f"{len(g.edges)}-edge topology has no perfect matching")
        self.obj = Objective(g, target, cfg.loss_kind, self.table)
        self.m = len(g.edges)

    def to_complex(self, x: np.ndarray) -> np.ndarray:
        if self.cfg.real_only:
            return x.astype(complex)
        return x[:self.m] + 1j * x[self.m:]

    def to_real(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        return w.real.copy() if self.cfg.real_only else np.concatenate([w.real, w.imag])

    def fg(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        w = self.to_complex(x)
        f, g = self.obj.value_and_grad(w)
        if self.mu:
            p, gp = self.obj.rate_penalty(w)
            f, g = f + self.mu * p, g + self.mu * gp
        if self.cfg.real_only:
            return f, g.real
        return f, np.concatenate([g.real, g.imag])

    def random_start(self, rng: np.random.Generator) -> np.ndarray:
        s = self.cfg.init_scale
        re = rng.uniform(-s, s, self.m)
        im = rng.uniform(-s, s, self.m)
        return re if self.cfg.real_only else np.concatenate([re, im])

    def run(self, x0, steps, stop_loss) -> tuple[np.ndarray, float]:
        """Returns the weights and the plain loss, without the count-rate term."""
        opt = OPTIMIZERS[self.cfg.method]
        if self.mu:
            # the penalized loss has no useful floor, so run to convergence
            x, _ = opt(self.fg, x0, steps, -math.inf, self.cfg.learning_rate)
            w = self.to_complex(x)
            return w, float(self.obj.value(w))
        x, f = opt(self.fg, x0, steps, stop_loss, self.cfg.learning_rate)
        return self.to_complex(x), float(f)


def optimize_weights(g: Graph, target: TargetState, cfg: OptimizerConfig,
                     restart: int = 0, init: Sequence[complex] | None = None,
                     stop_loss: float | None = None) -> tuple[Graph, float]:
    """Fit the weights of ``g``'s topology; returns the best graph and its loss.

    Starts from ``init`` when given, otherwise from uniform noise drawn from
    the stream ``(cfg.seed, restart)``.
    """
    prob = _Problem(g, target, cfg)
    if init is not None:
        x0 = prob.to_real(np.asarray(init, dtype=complex))
    else:
        x0 = prob.random_start(_rng(cfg.seed, restart))
    try:
        prob.fg(x0)
    except ZeroStateError as exc:
        raise UnmatchableTopology("state is zero at the starting point") from exc
    stop = cfg.search_threshold / 10 if stop_loss is None else stop_loss
    if cfg.rate_weight:
        # anneal the count-rate term away, then finish on the plain loss
        for mu in (cfg.rate_weight, cfg.rate_weight / 10, cfg.rate_weight / 100):
            try:
                w, _ = _Problem(g, target, cfg, mu).run(x0, cfg.steps, stop)
            except ZeroStateError:
                break
            x0 = prob.to_real(w)
    w, f = prob.run(x0, cfg.steps, stop)
    return g.with_weights(w), f


def _check_deadline(deadline: float | None) -> None:
    if deadline is not None and time.monotonic() > deadline:
        raise TimeoutError("search budget exhausted")


def refine_weights(g: Graph, target: TargetState, max_nfev: int = 200) -> Graph:
    """Drive the state onto the target ray by Levenberg-Marquardt least squares.

    Only meaningful close to an exact solution; used to push a discovered
    graph from ~1e-6 to machine-precision infidelity. Returns ``g``
    unchanged if the result is not better.
    """
    from scipy.optimize import least_squares

    table = MatchingTable(g)
    if table.n_terms == 0 or not g.edges:
        return g
    t = target.ket
    t_vec = np.array([t[k] for k in table.keys], dtype=complex)
    present = set(table.keys)
    missing = [k for k in t if k not in present]
    w0 = np.array(g.weights, dtype=complex)
    m = len(w0)
    c = np.vdot(t_vec, table.amplitudes(w0)) / t.norm2()
    goal = c * t_vec
    rows = np.repeat(table.term_key, table.term_edges.shape[1])
    cols = table.term_edges.ravel()
    # zero rows so that "lm" accepts underdetermined fits
    pad = max(0, 2 * m - 2 * len(table.keys))

    def resid(x):
        r = table.amplitudes(x[:m] + 1j * x[m:]) - goal
        return np.concatenate([r.real, r.imag, np.zeros(pad)])

    def jac(x):
        w = x[:m] + 1j * x[m:]
        D = np.zeros((len(table.keys), m), dtype=complex)
        np.add.at(D, (rows, cols), table._products_except(w).ravel())
        return np.vstack([np.hstack([D.real, -D.imag]), np.hstack([D.imag, D.real]),
                          np.zeros((pad, 2 * m))])

    x0 = np.concatenate([w0.real, w0.imag])
    sol = least_squares(resid, x0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15,
                        gtol=1e-15, max_nfev=max_nfev)
    w = sol.x[:m] + 1j * sol.x[m:]
    obj = Objective(g, target)
    if missing or obj.value(w) >= obj.value(w0):
        return g
    return g.with_weights(w)


# -- pruning -----------------------------------------------------------------

@dataclass
class DiscoveryResult:
    graph: Graph
    loss_trace: list[tuple[int, float, int]]
    loss: float
    fidelity: float
    seed: int
    restart: int
    report: VerificationReport
    snapped: bool = False

    @property
    def success(self) -> bool:
        return self.report.feed_forwardable

    @property
    def edge_count(self) -> int:
        return len(self.graph.edges)

    def trace_csv(self) -> str:
        lines = ["edge_count,loss,restart,seed"]
        lines += [f"{n},{loss:.17g},{r},{self.seed}" for n, loss, r in self.loss_trace]
        return "\n".join(lines) + "\n"


def _canonical_rank(edges: Sequence[Edge]) -> list[int]:
    order = sorted(range(len(edges)), key=lambda i: edges[i].key)
    rank = [0] * len(edges)
    for r, i in enumerate(order):
        rank[i] = r
    return rank


def _fit(g: Graph, target: TargetState, cfg: OptimizerConfig, w0: np.ndarray,
         rng_stream: tuple[int, ...], stop_loss: float) -> tuple[np.ndarray, float]:
    """Warm start from ``w0``; one fresh random start if that misses the threshold."""
    try:
        prob = _Problem(g, target, cfg, cfg.rate_weight / 10)
    except UnmatchableTopology:
        return w0, math.inf
    try:
        w, f = prob.run(prob.to_real(w0), cfg.steps, stop_loss)
    except ZeroStateError:
        w, f = w0, math.inf
    if f < cfg.search_threshold:
        return w, f
    try:
        w2, f2 = prob.run(prob.random_start(_rng(cfg.seed, *rng_stream)), cfg.steps, stop_loss)
    except ZeroStateError:
        return w, f
    return (w2, f2) if f2 < f else (w, f)


def _snap(w: np.ndarray) -> np.ndarray:
    big = w[np.argmax(np.abs(w))]
    u = w / big
    vals = np.array(SNAP_VALUES)
    return vals[np.argmin(np.abs(u[:, None] - vals[None, :]), axis=1)]


def drop_zero_edges(g: Graph) -> Graph:
    """Gauge-normalize and drop edges that carry nothing measurable."""
    g = gauge_normalize(g)
    tiny = np.flatnonzero(np.abs(np.array(g.weights)) < ZERO_WEIGHT)
    if len(tiny) and len(tiny) < len(g.edges):
        g = g.without_edges(tiny)
    return g


def prune_topology(g: Graph, target: TargetState, cfg: OptimizerConfig,
                   restart: int = 0, deadline: float | None = None) -> DiscoveryResult:
    """Remove edges one by one, weakest first, while the loss stays below threshold.

    ``g`` must carry fitted weights. "Weakest" is judged in the gauge of
    ``gauge_normalize``, since the raw weights can be rescaled per vertex.
    A removal that cannot be re-fitted below ``cfg.search_threshold``, or
    that drops the bounded count rate under ``cfg.min_rate``, is undone and
    that edge is never tried again. The survivor is polished to
    ``cfg.polish_threshold``.
    """
    g = gauge_normalize(g)
    w = np.array(g.weights, dtype=complex)
    stop = cfg.search_threshold / 10
    try:
        cur_loss = Objective(g, target, cfg.loss_kind).value(w)
    except ZeroStateError:
        cur_loss = math.inf
    trace = [(len(g.edges), cur_loss, restart)]
    protected: set[tuple[int, int, int, int]] = set()
    attempt = 0
    while True:
        rank = _canonical_rank(g.edges)
        cands = [i for i, e in enumerate(g.edges) if e.key not in protected]
        if not cands:
            break
        i = min(cands, key=lambda k: (abs(w[k]), rank[k]))
        _check_deadline(deadline)
        attempt += 1
        g2 = g.without_edges([i])
        w2, f2 = _fit(g2, target, cfg, np.delete(w, i), (restart, attempt), stop)
        if f2 < cfg.search_threshold and cfg.min_rate:
            if bounded_count_rate(g2.with_weights(w2), target) < cfg.min_rate:
                f2 = math.inf
        if f2 < cfg.search_threshold:
            g = gauge_normalize(g2.with_weights(w2))
            w, cur_loss = np.array(g.weights, dtype=complex), f2
            trace.append((len(g.edges), cur_loss, restart))
            log.debug("removed edge, %d left, loss %.3g", len(g.edges), cur_loss)
        else:
            protected.add(g.edges[i].key)

    g = g.with_weights(w)
    try:
        prob = _Problem(g, target, cfg)
        w, cur_loss = prob.run(prob.to_real(w), cfg.polish_steps, cfg.polish_threshold * 1e-4)
        g = gauge_normalize(g.with_weights(w))
    except (UnmatchableTopology, ZeroStateError):
        pass
    g = drop_zero_edges(g)

    snapped = False
    if cfg.snap_weights and len(g.edges):
        ws = _snap(np.array(g.weights))
        keep = ws != 0
        gs = g.with_weights(ws).without_edges(np.flatnonzero(~keep))
        try:
            fs = Objective(gs, target, cfg.loss_kind).value(np.array(gs.weights))
        except (ZeroStateError, ValueError):
            fs = math.inf
        if fs < cfg.polish_threshold * 1e-2:
            g, cur_loss, snapped = gs, fs, True
    trace.append((len(g.edges), cur_loss, restart))
    if target.spec is None:
        raise ValueError("target carries no gate spec; build it with target_for_graph")
    report = verify_gate(g, target.spec, cfg.polish_threshold)
    return DiscoveryResult(g, trace, cur_loss, report.fidelity, cfg.seed, restart,
                           report, snapped)


def discover(spec: GateSpec, ancilla_count: int, cfg: OptimizerConfig = OptimizerConfig(),
             ancilla_modes: Sequence[int] | None = None, ancilla_dim: int = 2,
             topology: Graph | None = None, deadline: float | None = None) -> DiscoveryResult:
    """Seed a complete topology, fit it from random restarts and prune the first fit.

    Restart ``r`` draws from the stream ``(cfg.seed, r)``; the first restart
    whose pruned graph verifies at ``cfg.polish_threshold`` wins. ``deadline``
    is a ``time.monotonic()`` value after which ``TimeoutError`` is raised.
    """
    g0 = topology if topology is not None else seed_topology(
        spec, ancilla_count, cfg.forbid, ancilla_modes, ancilla_dim, cfg.herald_only)
    target = target_for_graph(spec, g0)
    best = math.inf
    zero_starts = 0
    for r in range(cfg.max_restarts):
        _check_deadline(deadline)
        try:
            g, f = optimize_weights(g0, target, cfg, restart=r)
        except UnmatchableTopology:
            zero_starts += 1
            continue
        log.info("restart %d: loss %.3g", r, f)
        best = min(best, f)
        if f >= cfg.search_threshold:
            continue
        result = prune_topology(g, target, cfg, restart=r, deadline=deadline)
        if result.success:
            return result
        best = min(best, result.loss)
    if zero_starts == cfg.max_restarts:
        raise UnmatchableTopology("the seed topology has no perfect matching")
    raise NoSolutionFound(f"{cfg.max_restarts} restarts exhausted for {spec.name}", best)
