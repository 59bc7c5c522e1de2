"""Latent variable graphical lasso (sparse minus low-rank) by ADMM.

Solves

    min  tr((S - L) @ Sigma) - log det(S - L) + lam * (gamma * ||S||_1,off + tr L)
    s.t. S - L > 0,  L >= 0

with the splitting ``R = S - L``. Each iteration updates ``R`` by the
log-det proximal map, ``S`` by off-diagonal soft thresholding and ``L`` by
eigenvalue shrinkage onto the PSD cone, followed by a scaled dual step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import EdgeSet, DEFAULT_EDGE_TOL, edge_set, log_det, NotPositiveDefiniteError
from .glasso import PrecisionEstimate, _check_sigma


@dataclass(frozen=True)
class ADMMOptions:
    max_iter: int = 5000
    tol: float = 1e-6
    rho: float = 1.0
    adapt_every: int = 10
    mu: float = 10.0


@dataclass(frozen=True)
class LatentDecomposition:
    s_hat: np.ndarray
    l_hat: np.ndarray
    lam: float
    gamma: float
    iterations: int
    converged: bool
    primal_residual: float
    dual_residual: float
    objective: float = float("nan")
    rho: float = field(default=1.0, compare=False, repr=False)
    dual: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def sparse_estimate(self) -> PrecisionEstimate:
        return PrecisionEstimate(
            theta=self.s_hat, lam=self.lam, method="lvglasso-sparse-part",
            iterations=self.iterations, converged=self.converged,
            objective=self.objective,
        )

    def rank(self, tol: float = 1e-6) -> int:
        return int(np.sum(np.linalg.eigvalsh(self.l_hat) > tol))


def lv_objective(S, L, sigma_hat, lam: float, gamma: float) -> float:
    R = S - L
    off = np.abs(S).sum() - np.abs(np.diag(S)).sum()
    return float(
        np.sum(R * sigma_hat) - log_det(R) + lam * (gamma * off + np.trace(L))
    )


def _soft_offdiag(A, t):
    out = np.sign(A) * np.maximum(np.abs(A) - t, 0.0)
    np.fill_diagonal(out, np.diag(A))
    return out


def _sym(A):
    return (A + A.T) / 2.0


def fit_lvglasso(
    sigma_hat, lam: float, gamma: float, opts: ADMMOptions = ADMMOptions(),
    init: Optional[LatentDecomposition] = None,
) -> LatentDecomposition:
    """Fit the sparse-plus-low-rank decomposition at ``(lam, gamma)``.

    Convergence is declared when both the primal residual ``||R - S + L||_F``
    and the dual residual ``rho * ||(S - L) - (S - L)_prev||_F``, divided by
    ``p``, fall below ``opts.tol``. ``init`` warm-starts from a previous
    fit (its iterates, scaled dual and penalty parameter).
    """
    if not (lam > 0 and gamma > 0):
        raise ValueError("lam and gamma must be positive")
    sig = np.array(_check_sigma(sigma_hat))
    p = sig.shape[0]
    rho = float(opts.rho)

    if init is None:
        S = np.diag(2.0 / np.diag(sig))
        L = np.zeros((p, p))
        U = np.zeros((p, p))
    else:
        S, L = np.array(init.s_hat), np.array(init.l_hat)
        rho = init.rho
        U = np.array(init.dual) if init.dual is not None else np.zeros((p, p))
    r_norm = s_norm = np.inf
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        # R: argmin tr(R sig) - logdet R + rho/2 ||R - (S - L - U)||^2
        d, Q = np.linalg.eigh(rho * (S - L - U) - sig)
        r_eig = (d + np.sqrt(d * d + 4.0 * rho)) / (2.0 * rho)
        R = _sym((Q * r_eig) @ Q.T)

        SL_prev = S - L
        S = _soft_offdiag(R + L + U, lam * gamma / rho)
        d, Q = np.linalg.eigh(_sym(S - R - U))
        l_eig = np.maximum(d - lam / rho, 0.0)
        L = _sym((Q * l_eig) @ Q.T)

        resid = R - S + L
        U = U + resid
        if not np.all(np.isfinite(U)):
            raise FloatingPointError(f"non-finite ADMM iterate at iteration {it}")

        r_norm = np.linalg.norm(resid) / p
        s_norm = rho * np.linalg.norm(S - L - SL_prev) / p
        if max(r_norm, s_norm) < opts.tol:
            converged = True
            break
        if opts.adapt_every and it % opts.adapt_every == 0:
            if r_norm > opts.mu * s_norm:
                rho *= 2.0
                U /= 2.0
            elif s_norm > opts.mu * r_norm:
                rho /= 2.0
                U *= 2.0

    S = _sym(S) + 0.0
    L = _sym(L)
    try:
        obj = lv_objective(S, L, sig, lam, gamma)
    except NotPositiveDefiniteError:
        obj = float("nan")
    return LatentDecomposition(
        s_hat=S, l_hat=L, lam=float(lam), gamma=float(gamma), iterations=it,
        converged=converged, primal_residual=float(r_norm),
        dual_residual=float(s_norm), objective=obj, rho=rho, dual=U,
    )


def lv_edge_set(fit: LatentDecomposition, tol: float = DEFAULT_EDGE_TOL) -> EdgeSet:
    return edge_set(fit.s_hat, tol)
