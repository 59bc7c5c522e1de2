"""Graphical lasso by block coordinate descent.

Minimizes ``tr(S @ Theta) - log det Theta + lam * sum_{j != k} |Theta_jk|``
over positive definite ``Theta``. The diagonal is never penalized.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _cd
from .core import (
    NotPositiveDefiniteError,
    as_symmetric,
    log_det,
    min_eigenvalue,
    spd_inverse,
)

METHODS = ("glasso", "clime", "neighborhood", "lvglasso-sparse-part", "thresholded")


class DegenerateCovarianceError(ValueError):
    """A variable has zero (or negative) sample variance."""


@dataclass(frozen=True)
class SolverOptions:
    max_iter: int = 200
    tol: float = 1e-6
    inner_max_iter: int = 1000
    inner_tol: float = 1e-10

    def __post_init__(self):
        if self.max_iter < 1 or self.inner_max_iter < 1:
            raise ValueError("iteration caps must be >= 1")
        if not (self.tol > 0 and self.inner_tol > 0):
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class PrecisionEstimate:
    """A fitted precision matrix and how it was obtained."""

    theta: np.ndarray
    lam: float
    method: str
    iterations: int = 0
    converged: bool = True
    objective: float = float("nan")
    info: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")

    @property
    def dim(self) -> int:
        return self.theta.shape[0]


def _check_sigma(sigma_hat) -> np.ndarray:
    s = as_symmetric(sigma_hat)
    d = np.diag(s)
    if np.any(d <= 0):
        j = int(np.flatnonzero(d <= 0)[0])
        raise DegenerateCovarianceError(f"variable {j} has variance {d[j]}")
    return s


def glasso_objective(theta, sigma_hat, lam: float) -> float:
    theta = np.asarray(theta)
    off = np.abs(theta).sum() - np.abs(np.diag(theta)).sum()
    return float(np.sum(sigma_hat * theta) - log_det(theta) + lam * off)


def _penalty_matrix(p: int, lam: float, support: Optional[np.ndarray]) -> np.ndarray:
    P = np.full((p, p), float(lam))
    if support is not None:
        P[~np.asarray(support, dtype=bool)] = np.inf
    np.fill_diagonal(P, 0.0)
    return P


def _solve(s, P, lam, opts, init):
    if init is not None:
        try:
            return _solve_from(s, P, lam, opts, init)
        except NotPositiveDefiniteError:
            # a warm start from another lambda need not be dual feasible here
            pass
    return _solve_from(s, P, lam, opts, None)


def _solve_from(s, P, lam, opts, init):
    p = s.shape[0]
    W = np.array(s, dtype=float, copy=True)
    B = np.zeros((p, p))
    if init is not None:
        t0 = np.asarray(init.theta if isinstance(init, PrecisionEstimate) else init)
        W = np.array(spd_inverse(t0))
        np.fill_diagonal(W, np.diag(s))
        B = -t0 / np.diag(t0)[None, :]
        np.fill_diagonal(B, 0.0)
        B[np.isinf(P)] = 0.0
    off = np.abs(s)[~np.eye(p, dtype=bool)]
    scale = off.mean() if off.size and off.mean() > 0 else np.diag(s).mean()
    theta, sweeps, converged, status = _cd.glasso_bcd(
        s, P, W, B, opts.max_iter, opts.tol * scale,
        opts.inner_max_iter, opts.inner_tol,
    )
    if status == _cd.NOT_PD:
        ev = min_eigenvalue(W) if np.all(np.isfinite(W)) else float("nan")
        raise NotPositiveDefiniteError(ev, "covariance iterate (lambda too small?)")
    # + 0.0 clears negative zeros
    theta = as_symmetric((theta + theta.T) / 2.0 + 0.0)
    try:
        obj = glasso_objective(theta, s, lam)
    except NotPositiveDefiniteError:
        obj = float("nan")
    return theta, int(sweeps), bool(converged), obj


def fit_glasso(
    sigma_hat,
    lam: float,
    opts: SolverOptions = SolverOptions(),
    init: Optional[PrecisionEstimate] = None,
    support=None,
) -> PrecisionEstimate:
    """Fit the graphical lasso at penalty ``lam``.

    Parameters
    ----------
    sigma_hat : array-like, shape (p, p)
        Sample covariance (symmetric, positive diagonal).
    lam : float
        Off-diagonal l1 penalty, ``>= 0``.
    opts : SolverOptions
        Outer/inner iteration caps and tolerances.
    init : PrecisionEstimate, optional
        Warm start.
    support : array-like of bool, shape (p, p), optional
        If given, off-diagonal entries outside ``support`` are pinned at
        zero (used for support-restricted refits).

    Returns
    -------
    PrecisionEstimate
        ``converged`` is False when the sweep cap was hit.
    """
    if lam < 0:
        raise ValueError("lam must be non-negative")
    s = _check_sigma(sigma_hat)
    P = _penalty_matrix(s.shape[0], lam, support)
    theta, sweeps, converged, obj = _solve(s, P, lam, opts, init)
    return PrecisionEstimate(
        theta=theta, lam=float(lam), method="glasso", iterations=sweeps,
        converged=converged, objective=obj,
    )


def fit_glasso_path(
    sigma_hat, lambdas: Sequence[float], opts: SolverOptions = SolverOptions()
) -> list:
    """Fit along a descending grid, warm-starting each fit from the last."""
    lambdas = [float(v) for v in lambdas]
    if any(v <= 0 for v in lambdas):
        raise ValueError("lambdas must be strictly positive")
    if any(a < b for a, b in zip(lambdas, lambdas[1:])):
        raise ValueError("lambdas must be sorted in descending order")
    out = []
    prev = None
    for lam in lambdas:
        prev = fit_glasso(sigma_hat, lam, opts, init=prev)
        out.append(prev)
    return out


def kkt_residual(est: PrecisionEstimate, sigma_hat, lam: float) -> float:
    """Largest violation of the graphical lasso stationarity conditions."""
    theta = np.asarray(est.theta)
    s = np.asarray(sigma_hat, dtype=float)
    W = spd_inverse(theta)
    g = s - W
    p = s.shape[0]
    off = ~np.eye(p, dtype=bool)
    active = off & (theta != 0)
    inactive = off & (theta == 0)
    res = np.abs(np.diag(g))
    vals = [res.max() if p else 0.0]
    if active.any():
        vals.append(np.abs(g[active] + lam * np.sign(theta[active])).max())
    if inactive.any():
        vals.append(np.maximum(0.0, np.abs(g[inactive]) - lam).max())
    return float(max(vals))
