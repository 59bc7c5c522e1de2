"""Estimator + tuning pipelines used by the experiment runner and the case study.

Every pipeline maps a data matrix (and, for oracle tuning, a target edge
count) to a :class:`MethodResult`. Method names follow the experiment
configs: ``glasso``, ``tglasso``, ``nbsel``, ``tnbsel``, ``clime``,
``tclime``, ``lvglasso``; the ``t`` prefix means "fit at the initial
lambda_0 and hard-threshold".
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .clime import fit_clime
from .core import EdgeSet, edge_set, sample_covariance
from .glasso import PrecisionEstimate, SolverOptions, fit_glasso
from .lvglasso import ADMMOptions, LatentDecomposition, fit_lvglasso, lv_edge_set
from .neighborhood import fit_neighborhood
from .select import (
    Candidate,
    cv_scores,
    default_lambda0,
    kfold_indices,
    select_by_ebic,
    threshold_for_edge_count,
)

METHODS = ("glasso", "tglasso", "nbsel", "tnbsel", "clime", "tclime", "lvglasso")
TUNING_MODES = ("oracle_count", "ebic", "cv")
DATA_DRIVEN_METHODS = ("glasso", "tglasso", "lvglasso")
DEFAULT_GAMMAS = (0.5, 1.0, 2.0, 4.0)


@dataclass
class MethodResult:
    edges: EdgeSet
    weights: np.ndarray
    lam: float = float("nan")
    tau: float = float("nan")
    gamma: float = float("nan")
    converged: bool = True
    info: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TuningSettings:
    """Knobs shared by all pipelines (see ``ExperimentConfig.tuning``)."""

    mode: str = "oracle_count"
    lambda0_c: float = 0.1
    gamma_ebic: float = 0.5
    K: int = 5
    n_lambda: int = 10
    lambda_min_ratio: float = 0.01
    gammas: tuple = DEFAULT_GAMMAS
    count_step: int = 0
    nbsel_rule: str = "AND"
    cv_seed: int = 0
    search_steps: int = 40
    # when set, data-driven pipelines fit at this lambda only
    lambda_fixed: Optional[float] = None


GLASSO_OPTS = SolverOptions()
LV_SEARCH_OPTS = ADMMOptions(tol=1e-5)


# --------------------------------------------------------------------------
# helpers

def _offdiag_max(S) -> float:
    S = np.asarray(S)
    return float(np.abs(S - np.diag(np.diag(S))).max())


def lambda_grid(lam_max: float, n: int, min_ratio: float) -> list:
    """Descending log-spaced grid from ``lam_max`` to ``lam_max * min_ratio``."""
    return [float(v) for v in np.geomspace(lam_max, lam_max * min_ratio, n)]


def search_lambda_for_count(fit: Callable, count: Callable, k: int, lo: float,
                            hi: float, steps: int = 40):
    """Geometric bisection for a lambda whose fit has at most ``k`` edges.

    ``count(fit(lam))`` is assumed non-increasing in lambda. Among the fits
    visited with count ``<= k`` the one with the largest count wins, ties
    going to the larger lambda. Returns ``(lam, fitted, n_edges)``.
    """
    while count(fit(hi)) > k:
        hi *= 2.0
    visited = []
    prev = None
    for _ in range(steps):
        mid = math.sqrt(lo * hi)
        f = fit(mid, prev)
        prev = f
        c = count(f)
        if c <= k:
            visited.append((c, mid, f))
            hi = mid
            if c == k:
                break
        else:
            lo = mid
        if hi / lo < 1.0 + 1e-9:
            break
    if not visited:
        f = fit(hi, None)
        visited.append((count(f), hi, f))
    c, lam, f = max(visited, key=lambda t: (t[0], t[1]))
    return lam, f, c


def _threshold_result(est: PrecisionEstimate, k: int) -> MethodResult:
    tau, t = threshold_for_edge_count(est, k)
    return MethodResult(edges=t.edges, weights=t.theta_tilde, lam=est.lam, tau=tau,
                        converged=est.converged,
                        info={"shortfall": t.shortfall, "exhausted": t.exhausted})


def _count_grid(nnz: int, step: int) -> list:
    if step <= 0:
        step = max(1, nnz // 100)
    ks = list(range(0, nnz + 1, step))
    if ks[-1] != nnz:
        ks.append(nnz)
    return ks


# --------------------------------------------------------------------------
# oracle-count pipelines

def _glasso_fit(S):
    def fit(lam, prev=None):
        return fit_glasso(S, lam, GLASSO_OPTS)
    return fit


def oracle_glasso(x, S, k, t: TuningSettings) -> MethodResult:
    lam_max = _offdiag_max(S)
    lam, est, _ = search_lambda_for_count(
        _glasso_fit(S), lambda e: len(edge_set(e.theta)), k,
        lam_max * 1e-4, lam_max, t.search_steps)
    return MethodResult(edges=edge_set(est.theta), weights=est.theta, lam=lam,
                        tau=0.0, converged=est.converged)


def oracle_tglasso(x, S, k, t: TuningSettings) -> MethodResult:
    n, p = x.shape
    est = fit_glasso(S, default_lambda0(n, p, t.lambda0_c), GLASSO_OPTS)
    return _threshold_result(est, k)


def _nb_lam(n, lam0):
    # lambda_0 refers to the (1/2n)-normalized lasso; fit_neighborhood is unnormalized
    return 2.0 * n * lam0


def oracle_nbsel(x, S, k, t: TuningSettings) -> MethodResult:
    n, p = x.shape

    def fit(lam, prev=None):
        return fit_neighborhood(x, lam, t.nbsel_rule)

    lam, nb, _ = search_lambda_for_count(fit, lambda f: len(f.edges), k,
                                         2.0 * n * 1e-4, 2.0 * n, t.search_steps)
    est = nb.to_estimate()
    return MethodResult(edges=nb.edges, weights=est.theta, lam=lam, tau=0.0)


def oracle_tnbsel(x, S, k, t: TuningSettings) -> MethodResult:
    n, p = x.shape
    nb = fit_neighborhood(x, _nb_lam(n, default_lambda0(n, p, t.lambda0_c)), t.nbsel_rule)
    return _threshold_result(nb.to_estimate(), k)


def oracle_clime(x, S, k, t: TuningSettings) -> MethodResult:
    def fit(lam, prev=None):
        return fit_clime(S, lam)

    lam, est, _ = search_lambda_for_count(fit, lambda e: len(edge_set(e.theta)), k,
                                          1e-3, 1.0, min(t.search_steps, 25))
    return MethodResult(edges=edge_set(est.theta), weights=est.theta, lam=lam, tau=0.0)


def oracle_tclime(x, S, k, t: TuningSettings) -> MethodResult:
    n, p = x.shape
    est = fit_clime(S, default_lambda0(n, p, t.lambda0_c))
    return _threshold_result(est, k)


def oracle_lvglasso(x, S, k, t: TuningSettings) -> MethodResult:
    """Per gamma, bisect lambda; keep the pair closest to ``k`` edges (ties: larger lambda)."""
    lam_max = _offdiag_max(S)
    best = None
    for gamma in t.gammas:
        def fit(lam, prev=None, gamma=gamma):
            return fit_lvglasso(S, lam, gamma, LV_SEARCH_OPTS, init=prev)

        lam, f, c = search_lambda_for_count(fit, lambda r: len(lv_edge_set(r)), k,
                                            lam_max * 1e-3 / gamma, 2 * lam_max / gamma,
                                            min(t.search_steps, 20))
        key = (c, lam)
        if best is None or key > best[0]:
            best = (key, gamma, f)
    _, gamma, f = best
    return MethodResult(edges=lv_edge_set(f), weights=f.s_hat, lam=f.lam, tau=0.0,
                        gamma=gamma, converged=f.converged, info={"rank_l": f.rank()})


ORACLE = {
    "glasso": oracle_glasso,
    "tglasso": oracle_tglasso,
    "nbsel": oracle_nbsel,
    "tnbsel": oracle_tnbsel,
    "clime": oracle_clime,
    "tclime": oracle_tclime,
    "lvglasso": oracle_lvglasso,
}


# --------------------------------------------------------------------------
# data-driven pipelines

def _lv_df(f: LatentDecomposition) -> int:
    r = f.rank()
    p = f.l_hat.shape[0]
    return r * p - r * (r - 1) // 2


def ebic_glasso(x, S, t: TuningSettings) -> MethodResult:
    n = x.shape[0]
    grid = _glasso_grid(S, t)
    cands = []
    prev = None
    for lam in grid:
        prev = fit_glasso(S, lam, GLASSO_OPTS, init=prev)
        cands.append(Candidate(lam, 0.0, edge_set(prev.theta), prev.theta, prev))
    best, score = select_by_ebic(cands, S, n, t.gamma_ebic)
    est = best.payload
    return MethodResult(edges=best.edges, weights=est.theta, lam=best.lam, tau=0.0,
                        converged=est.converged, info={"ebic": score})


def _glasso_grid(S, t: TuningSettings) -> list:
    if t.lambda_fixed is not None:
        return [float(t.lambda_fixed)]
    return lambda_grid(_offdiag_max(S), t.n_lambda, t.lambda_min_ratio)


def _lambda0(x, t: TuningSettings) -> float:
    if t.lambda_fixed is not None:
        return float(t.lambda_fixed)
    n, p = x.shape
    return default_lambda0(n, p, t.lambda0_c)


def threshold_candidates(S, base: PrecisionEstimate, t: TuningSettings) -> list:
    """Candidates along the threshold path of ``base``, scored at support-restricted refits."""
    mags = np.abs(base.theta[np.triu_indices(base.dim, 1)])
    nnz = int(np.count_nonzero(mags))
    cands = []
    seen = set()
    for k in _count_grid(nnz, t.count_step):
        tau, th = threshold_for_edge_count(base, k)
        if tau in seen:
            continue
        seen.add(tau)
        support = th.edges.to_mask()
        refit = fit_glasso(S, base.lam, GLASSO_OPTS, support=support)
        cands.append(Candidate(base.lam, tau, th.edges, refit.theta, th))
    return cands


def ebic_tglasso(x, S, t: TuningSettings) -> MethodResult:
    n = x.shape[0]
    base = fit_glasso(S, _lambda0(x, t), GLASSO_OPTS)
    best, score = select_by_ebic(threshold_candidates(S, base, t), S, n, t.gamma_ebic)
    th = best.payload
    return MethodResult(edges=th.edges, weights=th.theta_tilde, lam=base.lam,
                        tau=best.tau, converged=base.converged, info={"ebic": score})


def _lv_grid(S, t: TuningSettings, gamma: float) -> list:
    if t.lambda_fixed is not None:
        return [float(t.lambda_fixed)]
    return lambda_grid(_offdiag_max(S) / gamma, t.n_lambda, t.lambda_min_ratio)


def ebic_lvglasso(x, S, t: TuningSettings) -> MethodResult:
    from .select import ebic_score

    n = x.shape[0]
    best = None
    for gamma in t.gammas:
        prev = None
        for lam in _lv_grid(S, t, gamma):
            prev = fit_lvglasso(S, lam, gamma, LV_SEARCH_OPTS, init=prev)
            edges = lv_edge_set(prev)
            score = ebic_score(edges, prev.s_hat - prev.l_hat, S, n, t.gamma_ebic,
                               extra_df=_lv_df(prev))
            key = (score, -lam, -gamma)
            if best is None or key < best[0]:
                best = (key, prev, edges)
    (score, _, _), f, edges = best
    return MethodResult(edges=edges, weights=f.s_hat, lam=f.lam, tau=0.0,
                        gamma=f.gamma, converged=f.converged,
                        info={"ebic": score, "rank_l": f.rank()})


def cv_glasso(x, S, t: TuningSettings) -> MethodResult:
    grid = _glasso_grid(S, t)
    scores = cv_scores(x, grid, t.K, "glasso", GLASSO_OPTS, t.cv_seed)
    i = min(range(len(grid)), key=lambda i: (scores[i], -grid[i]))
    est = fit_glasso(S, grid[i], GLASSO_OPTS)
    return MethodResult(edges=edge_set(est.theta), weights=est.theta, lam=grid[i],
                        tau=0.0, converged=est.converged)


def cv_tglasso(x, S, t: TuningSettings) -> MethodResult:
    """Cross-validate the number of retained edges at fixed lambda_0.

    On each training fold the lambda_0 fit is thresholded to every count on
    the grid and refit on that support; the count with the smallest mean
    held-out negative log-likelihood is then applied to the full-data fit.
    """
    n, p = x.shape
    lam0 = _lambda0(x, t)
    ks = _count_grid(p * (p - 1) // 2, t.count_step)
    folds = kfold_indices(n, t.K, t.cv_seed)
    loss = np.zeros(len(ks))
    for test in folds:
        train = np.setdiff1d(np.arange(n), test)
        s_tr = sample_covariance(x[train])
        s_te = sample_covariance(x[test])
        base = fit_glasso(s_tr, lam0, GLASSO_OPTS)
        for i, k in enumerate(ks):
            _, th = threshold_for_edge_count(base, k)
            refit = fit_glasso(s_tr, lam0, GLASSO_OPTS, support=th.edges.to_mask())
            sign, logdet = np.linalg.slogdet(refit.theta)
            loss[i] += float(np.sum(s_te * refit.theta)) - logdet
    i = min(range(len(ks)), key=lambda i: (loss[i], ks[i]))
    base = fit_glasso(S, lam0, GLASSO_OPTS)
    res = _threshold_result(base, ks[i])
    res.info["cv_count"] = ks[i]
    return res


def cv_lvglasso(x, S, t: TuningSettings) -> MethodResult:
    best = None
    for gamma in t.gammas:
        grid = _lv_grid(S, t, gamma)
        scores = cv_scores(x, grid, t.K, "lvglasso", seed=t.cv_seed, gamma=gamma)
        for lam, sc in zip(grid, scores):
            key = (float(sc), -lam, -gamma)
            if best is None or key < best[0]:
                best = (key, lam, gamma)
    _, lam, gamma = best
    f = fit_lvglasso(S, lam, gamma)
    return MethodResult(edges=lv_edge_set(f), weights=f.s_hat, lam=lam, tau=0.0,
                        gamma=gamma, converged=f.converged, info={"rank_l": f.rank()})


DATA_DRIVEN = {
    ("glasso", "ebic"): ebic_glasso,
    ("tglasso", "ebic"): ebic_tglasso,
    ("lvglasso", "ebic"): ebic_lvglasso,
    ("glasso", "cv"): cv_glasso,
    ("tglasso", "cv"): cv_tglasso,
    ("lvglasso", "cv"): cv_lvglasso,
}


def run_method(method: str, x, S, t: TuningSettings, k: Optional[int] = None) -> MethodResult:
    """Fit ``method`` on data ``x`` (covariance ``S``) under ``t.mode``."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if t.mode == "oracle_count":
        if k is None:
            raise ValueError("oracle_count tuning needs the true edge count")
        return ORACLE[method](x, S, k, t)
    try:
        fn = DATA_DRIVEN[(method, t.mode)]
    except KeyError:
        raise ValueError(f"{method} does not support tuning mode {t.mode!r}") from None
    return fn(x, S, t)
