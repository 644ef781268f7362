import math

import numpy as np
import pytest

import plap


def path_graph(n):
    rows = np.r_[np.arange(n - 1), np.arange(1, n)]
    cols = np.r_[np.arange(1, n), np.arange(n - 1)]
    return plap.Graph.from_edges(n, rows, cols, np.ones(2 * (n - 1)))


def test_version():
    assert plap.__version__


def test_knn_graph_csr():
    pts, _, _ = plap.problem_s(200, 2, 5, seed=1)
    g = plap.knn_graph(pts, 10)
    offsets, cols, w = g.csr()
    assert g.n == 200
    assert offsets[-1] == g.nnz == len(cols) == len(w)
    assert g.is_symmetric and g.is_connected()
    assert np.all((w > 0) & (w <= 1))


def test_path_solution_is_linear():
    g = path_graph(5)
    for method, p in [("newton", 4.0), ("newton_like", 4.0), ("gradient_descent", math.inf)]:
        u, report = plap.solve(g, [0, 4], [0.0, 1.0], p, method=method, tol=1e-10)
        np.testing.assert_allclose(u, np.linspace(0, 1, 5), atol=1e-8)
        assert report["converged"]


def test_solution_obeys_max_principle():
    pts, idx, vals = plap.problem_s(500, 3, 10, seed=2)
    g = plap.knn_graph(pts, 10)
    u, report = plap.solve(g, idx, vals, 5.0)
    assert report["final_residual"] <= 1e-8
    assert vals.min() - 1e-12 <= u.min() and u.max() <= vals.max() + 1e-12
    np.testing.assert_allclose(u[idx], vals)
    res = plap.variational_residual(g, u, 5.0)
    unlabeled = np.setdiff1d(np.arange(g.n), idx)
    assert np.abs(res[unlabeled]).max() < 1e-6


def test_operators():
    g = path_graph(3)
    assert plap.game_operator(g, np.array([0.0, 0.0, 1.0]), math.inf)[1] == pytest.approx(1.0)
    assert plap.energy(g, np.array([0.0, 0.5, 1.0]), 2.0) == pytest.approx(0.25)


def test_classify_two_gaussians():
    pts, truth = plap.two_gaussians(400, 2, 4.0, seed=3)
    g = plap.knn_graph(pts, 10)
    idx = np.array([np.flatnonzero(truth == c)[0] for c in (0, 1)])
    scores = plap.classify(g, idx, truth[idx], 4.0)
    assert scores.shape == (400, 2)
    assert np.mean(scores.argmax(axis=1) == truth) > 0.8


def test_errors():
    g = path_graph(3)
    with pytest.raises(ValueError):
        plap.solve(g, [0, 2], [0.0, 1.0], 1.5)
    with pytest.raises(ValueError):
        plap.solve(g, [0, 2], [0.0, 1.0], 3.0, method="irls")
    pts, idx, vals = plap.problem_s(300, 2, 5, seed=4)
    big = plap.knn_graph(pts, 10)
    with pytest.raises(plap.SolverError) as err:
        plap.solve(big, idx, vals, 30.0, homotopy=False, tol=1e-300)
    assert err.value.report["converged"] is False
