import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from threshgraph.core import sample_covariance
from threshgraph.glasso import SolverOptions
from threshgraph.neighborhood import fit_neighborhood, lasso_cd, standardize
from threshgraph.simulate import latent_spec, make_rng, sample_mvn, small_world_precision

import fixture_data
from oracles import normal_equations


def _soft(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def test_orthonormal_design_closed_form():
    rng = make_rng(1)
    Q, _ = np.linalg.qr(rng.standard_normal((30, 4)))
    y = rng.standard_normal(30)
    lam = 0.4
    # ||y - Q b||^2 + lam |b|_1 separates: b_k = soft(q_k'y, lam / 2)
    np.testing.assert_allclose(lasso_cd(Q, y, lam), _soft(Q.T @ y, lam / 2), atol=1e-10)


def test_zero_penalty_is_least_squares():
    rng = make_rng(2)
    X = rng.standard_normal((60, 5))
    y = X @ np.array([1.0, -2.0, 0.0, 0.5, 3.0]) + 0.1 * rng.standard_normal(60)
    opts = SolverOptions(inner_tol=1e-13, inner_max_iter=100000)
    np.testing.assert_allclose(lasso_cd(X, y, 0.0, opts), normal_equations(X, y), atol=1e-6)


def test_large_penalty_gives_zero():
    rng = make_rng(3)
    X = rng.standard_normal((20, 3))
    y = rng.standard_normal(20)
    lam = 2 * np.abs(X.T @ y).max()
    assert np.all(lasso_cd(X, y, lam) == 0.0)


def test_lasso_kkt():
    rng = make_rng(4)
    X = rng.standard_normal((40, 8))
    y = X[:, 0] - X[:, 3] + rng.standard_normal(40)
    lam = 10.0
    b = lasso_cd(X, y, lam, SolverOptions(inner_tol=1e-12))
    g = 2 * X.T @ (X @ b - y)
    act = b != 0
    assert np.all(np.abs(g[~act]) <= lam + 1e-6)
    np.testing.assert_allclose(g[act], -lam * np.sign(b[act]), atol=1e-6)


def test_lasso_dimension_mismatch():
    with pytest.raises(ValueError):
        lasso_cd(np.ones((3, 2)), np.ones(4), 0.1)


def test_independent_data_gives_frozen_empty_graph(frozen):
    x = make_rng(5).standard_normal((500, 5))
    fit = fit_neighborhood(x, fixture_data.mb_lambda(500, 5))
    assert sorted(map(list, fit.edges)) == frozen["neighborhood_independent_edges"] == []


@pytest.mark.parametrize("rule", ["AND", "OR"])
def test_perfectly_correlated_pair(rule):
    y1 = make_rng(6).standard_normal(20)
    fit = fit_neighborhood(np.column_stack([y1, y1]), 0.1, rule)
    assert fit.edges.edges == {(0, 1)}


def test_constant_column_rejected():
    x = make_rng(7).standard_normal((10, 3))
    x[:, 2] = 4.0
    with pytest.raises(ValueError, match="column 2"):
        fit_neighborhood(x, 1.0)


def test_standardize_scaling():
    z = standardize(make_rng(8).standard_normal((25, 4)) * [1, 10, 100, 0.1])
    np.testing.assert_allclose((z ** 2).mean(axis=0), 1.0)
    np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-12)


def test_per_node_lambda_and_coef_invariants():
    x = make_rng(9).standard_normal((50, 4))
    fit = fit_neighborhood(x, [1.0, 2.0, 3.0, 4.0])
    assert fit.lambda_per_node == (1.0, 2.0, 3.0, 4.0)
    assert np.all(np.diag(fit.coef) == 0)


def _sim_data(seed, n=150, p_h=0):
    spec = latent_spec(small_world_precision(20, seed=seed), p_h=p_h, seed=seed)
    return sample_mvn(spec.sigma_o, n, seed=seed + 50)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 1000), st.floats(5.0, 200.0))
def test_and_subset_of_or(seed, lam):
    x = _sim_data(seed, n=60)
    a = fit_neighborhood(x, lam, "AND")
    o = fit_neighborhood(x, lam, "OR")
    assert a.edges.issubset(o.edges)
    for fit, rule in ((a, "AND"), (o, "OR")):
        nz = fit.coef != 0
        both = nz & nz.T if rule == "AND" else nz | nz.T
        assert fit.edges.edges == {(i, j) for i, j in zip(*np.nonzero(np.triu(both, 1)))}


def _nb_path(seed):
    x = _sim_data(seed, p_h=20 if seed % 2 else 0)
    grid = np.geomspace(2 * 150, 2 * 150 * 0.01, 12)
    return {rule: [fit_neighborhood(x, lam, rule).edges for lam in grid] for rule in ("AND", "OR")}


@pytest.mark.parametrize("seed", range(4))
def test_raising_lambda_never_adds_edges_count(seed):
    for path in _nb_path(seed).values():
        counts = [len(e) for e in path]
        assert counts == sorted(counts)


NESTING_XFAIL = pytest.mark.xfail(
    strict=True,
    reason="lasso supports along a lambda grid are not nested in general: on these "
           "seeds a few pairs leave while more enter as lambda decreases",
)


@pytest.mark.parametrize("seed", [0, pytest.param(1, marks=NESTING_XFAIL),
                                  pytest.param(2, marks=NESTING_XFAIL),
                                  pytest.param(3, marks=NESTING_XFAIL)])
def test_raising_lambda_never_adds_edges_nested(seed):
    for path in _nb_path(seed).values():
        for big, small in zip(path, path[1:]):
            assert big.issubset(small)


def test_nodewise_kkt():
    x = _sim_data(1)
    z = standardize(x)
    lam = 30.0
    fit = fit_neighborhood(x, lam, opts=SolverOptions(inner_tol=1e-12))
    p = z.shape[1]
    for j in range(p):
        others = [k for k in range(p) if k != j]
        X, y, b = z[:, others], z[:, j], fit.coef[j, others]
        g = 2 * X.T @ (X @ b - y)
        act = b != 0
        assert np.all(np.abs(g[~act]) <= lam + 1e-4)
        assert np.all(np.abs(g[act] + lam * np.sign(b[act])) <= 1e-4)


def test_combined_matrix_support_and_rule():
    x = _sim_data(2)
    for rule in ("AND", "OR"):
        fit = fit_neighborhood(x, 40.0, rule)
        m = fit.combined_matrix()
        assert np.array_equal(m, m.T)
        iu = np.triu_indices(m.shape[0], 1)
        support = {(i, j) for i, j in zip(*iu) if m[i, j] != 0}
        assert support == fit.edges.edges
        est = fit.to_estimate()
        assert est.method == "neighborhood"
