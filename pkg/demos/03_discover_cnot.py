"""Searching for a CNOT.

Start from the complete graph on two inputs, two outputs and two ancillas
with every color pair, fit the weights from a random start, then remove the
weakest edge for as long as the fit survives. The loss trace shows the
graph shrinking.
"""

from photongates import cx
from photongates.blueprint import graph_to_blueprint
from photongates.discovery import OptimizerConfig, discover, seed_topology

spec = cx(2, 2)
print(f"seed topology: {len(seed_topology(spec, 2).edges)} edges")

result = discover(spec, 2, OptimizerConfig(seed=1))
print(f"found on restart {result.restart}: {result.edge_count} edges, "
      f"fidelity {result.fidelity:.12f}")
counts = [n for n, _, _ in result.loss_trace]
print(f"pruning: {counts[0]} -> {counts[-1]} edges")
print()
print(result.report.summary())
print()
print(graph_to_blueprint(result.graph).to_text())
