"""Heralded photonic gates as colored, complex-weighted graphs."""

from .gates import (GateSpec, TargetState, apply_gate, build_target, ccx, compose_specs,
                    cswap, cx, identity, parse_gate_spec, swap)
from .graph import Edge, Graph, Vertex, canonicalize_edge, graph_from_json, graph_to_json, validate_graph
from .matchings import Ket, enumerate_pms, graph_state, oracle_state, state_gradient
from .objective import (VerificationReport, bounded_count_rate, count_rate, fidelity,
                        gauge_normalize, loss, loss_gradient, verify_gate)

__all__ = [
    "Edge", "GateSpec", "Graph", "Ket", "TargetState", "VerificationReport", "Vertex",
    "apply_gate", "bounded_count_rate", "build_target", "canonicalize_edge", "ccx", "compose_specs", "count_rate",
    "cswap", "cx", "enumerate_pms", "fidelity", "gauge_normalize", "graph_from_json", "graph_state",
    "graph_to_json", "identity", "loss", "loss_gradient", "oracle_state", "parse_gate_spec",
    "state_gradient", "swap", "validate_graph", "verify_gate",
]
__version__ = "0.1.0"
