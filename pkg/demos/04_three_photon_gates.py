"""The pinned Toffoli, Fredkin and qutrit CNOT graphs.

These come from long searches, so the package ships them as fixtures and
re-verifies them on load. Each one needs four heralding ancillas.
"""

from photongates.catalog import RECIPES, load_fixture

for fid in ("ccx-2", "ccx-3", "cswap-2", "cx-3-3"):
    fx = load_fixture(fid)
    rep = fx.report
    print(f"{fid:8s} {RECIPES[fid].gate:7s} ancillas {fx.ancilla_count}  "
          f"edges {len(fx.graph.edges):2d}  fidelity {rep.fidelity:.15f}  "
          f"rows {rep.rows_passed}/{len(rep.truth_table)}  "
          f"count rate {rep.count_rate:.3g}")

print()
print(load_fixture("cswap-2").report.summary())
