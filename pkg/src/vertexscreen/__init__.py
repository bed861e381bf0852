"""Signal-subgraph estimation for labeled graph populations.

Vertices are screened by the distance-based correlation between their
adjacency-row features and the graph labels (one-shot or iteratively on
shrinking induced subgraphs); downstream classifiers then operate on the
selected induced subgraph.
"""

from . import classify, corr, evaluate, graph, screen

__all__ = ["classify", "corr", "evaluate", "graph", "screen"]
__version__ = "0.1.0"
