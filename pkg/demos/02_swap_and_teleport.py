"""SWAP three ways.

The simplest SWAP just crosses the wires. Teleportation moves a photon's
state to a path it never touches, heralded by two ancilla detectors; wiring
two such channels crosswise gives a SWAP with no edge between any input and
any output.
"""

from photongates import identity, swap, verify_gate
from photongates.catalog import load_fixture

crossing = load_fixture("swap2-crossing")
print(verify_gate(crossing.graph, swap(2)).summary())
print()

tp = load_fixture("teleport2-pi")
print("teleportation edges:")
for e in tp.graph.edges:
    print(f"  {e.a}-{e.b} modes ({e.mode_a},{e.mode_b}) weight {e.weight:.4f}")
print(verify_gate(tp.graph, identity(2)).summary())
print()

double = load_fixture("swap2-double-teleport")
io = set(double.graph.inputs) | set(double.graph.outputs)
direct = [e for e in double.graph.edges if e.a in io and e.b in io]
print(f"double teleportation: {len(double.graph.edges)} edges, "
      f"{len(direct)} between inputs and outputs")
print(verify_gate(double.graph, swap(2)).summary())
