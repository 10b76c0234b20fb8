"""Drawing a graph and reading it as an optical setup.

``export_dot`` writes Graphviz text (render with ``dot -Tpng``); the
blueprint lists sources, the paths where sources overlap and the detectors
that herald success.
"""

import sys

from photongates.blueprint import export_dot, graph_to_blueprint
from photongates.catalog import load_fixture

g = load_fixture("teleport2-pi").graph
sys.stdout.write(export_dot(g, "teleport"))
print()
print(graph_to_blueprint(g, "path-identity").to_text())
print(graph_to_blueprint(g, "path-erasure").to_text())
