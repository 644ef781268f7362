"""Graph p-Laplacian solvers for semi-supervised learning."""

from ._plap import (
    Graph,
    SolverError,
    __version__,
    classify,
    energy,
    game_operator,
    knn_graph,
    problem_s,
    solve,
    two_gaussians,
    variational_residual,
)

__all__ = [
    "Graph",
    "SolverError",
    "__version__",
    "classify",
    "energy",
    "game_operator",
    "knn_graph",
    "problem_s",
    "solve",
    "two_gaussians",
    "variational_residual",
]
