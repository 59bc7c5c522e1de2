"""Neighborhood selection: one lasso regression per node."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import _cd
from .core import EdgeSet, as_data_matrix
from .glasso import PrecisionEstimate, SolverOptions

RULES = ("AND", "OR")


def lasso_cd(X, y, lam: float, opts: SolverOptions = SolverOptions(), init=None) -> np.ndarray:
    """Minimize ``||y - X @ theta||_2^2 + lam * ||theta||_1``.

    No intercept is fitted. Columns of ``X`` with zero norm get a zero
    coefficient.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError("X must be 2-dimensional with at least one column")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has length {y.shape[0]}")
    if lam < 0:
        raise ValueError("lam must be non-negative")
    G = 2.0 * (X.T @ X)
    c = 2.0 * (X.T @ y)
    return _lasso_gram(G, c, np.full(X.shape[1], float(lam)), opts, init)


def _lasso_gram(G, c, lam, opts, init=None, excl=-1):
    zero = np.diag(G) <= 0
    beta = np.zeros(c.shape[0]) if init is None else np.array(init, dtype=float)
    if zero.any():
        # pin empty columns at zero by giving them a unit curvature and infinite penalty
        G = G.copy()
        lam = lam.copy()
        G[zero, zero] = 1.0
        lam[zero] = np.inf
        beta[zero] = 0.0
    _cd.lasso_gram_cd(G, c, lam, beta, excl, opts.inner_max_iter, opts.inner_tol)
    return beta + 0.0


@dataclass(frozen=True)
class NeighborhoodFit:
    coef: np.ndarray
    lambda_per_node: tuple
    combine_rule: str
    edges: EdgeSet

    def combined_matrix(self) -> np.ndarray:
        """Symmetric matrix whose support equals ``edges``.

        Under AND each pair keeps the smaller-magnitude coefficient of the two
        directed regressions (zero if either is zero); under OR the larger.
        Thresholding this matrix at ``tau`` therefore applies the same rule to
        the thresholded coefficients.
        """
        a, b = self.coef, self.coef.T
        pick_a = np.abs(a) <= np.abs(b)
        if self.combine_rule == "OR":
            pick_a = ~pick_a
        m = np.where(pick_a, a, b)
        if self.combine_rule == "AND":
            m = np.where((a != 0) & (b != 0), m, 0.0)
        np.fill_diagonal(m, 1.0)
        return m + 0.0

    def to_estimate(self) -> PrecisionEstimate:
        return PrecisionEstimate(
            theta=self.combined_matrix(),
            lam=float(np.mean(self.lambda_per_node)),
            method="neighborhood",
        )


def _combine(coef: np.ndarray, rule: str) -> EdgeSet:
    nz = coef != 0
    both = nz & nz.T if rule == "AND" else nz | nz.T
    i, j = np.nonzero(np.triu(both, k=1))
    return EdgeSet(coef.shape[0], frozenset(zip(i.tolist(), j.tolist())))


def standardize(data) -> np.ndarray:
    """Center columns and scale them to ``||x_j||^2 / n == 1``."""
    x = as_data_matrix(data)
    x = x - x.mean(axis=0)
    sd = np.sqrt((x ** 2).mean(axis=0))
    if np.any(sd <= 0):
        j = int(np.flatnonzero(sd <= 0)[0])
        raise ValueError(f"column {j} is constant")
    return x / sd


def fit_neighborhood(
    data,
    lam: Union[float, Sequence[float]],
    rule: str = "AND",
    opts: SolverOptions = SolverOptions(),
) -> NeighborhoodFit:
    """Regress each standardized column on all others with the lasso.

    ``lam`` is in the units of :func:`lasso_cd` (unnormalized squared
    error), either one value for every node or one per node.
    """
    if rule not in RULES:
        raise ValueError(f"rule must be one of {RULES}")
    x = standardize(data)
    n, p = x.shape
    if p < 2:
        raise ValueError("need at least 2 variables")
    lams = np.broadcast_to(np.asarray(lam, dtype=float), (p,)).copy()
    if np.any(lams < 0):
        raise ValueError("lam must be non-negative")
    G = 2.0 * (x.T @ x)
    coef = np.zeros((p, p))
    for j in range(p):
        lam_vec = np.full(p, lams[j])
        beta = _lasso_gram(G, G[:, j].copy(), lam_vec, opts, excl=j)
        beta[j] = 0.0
        coef[j] = beta
    return NeighborhoodFit(
        coef=coef,
        lambda_per_node=tuple(lams.tolist()),
        combine_rule=rule,
        edges=_combine(coef, rule),
    )
