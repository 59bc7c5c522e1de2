"""Hard thresholding of precision estimates and tuning-parameter selection."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .core import EdgeSet, as_data_matrix, edge_set, log_det, sample_covariance
from .glasso import PrecisionEstimate, SolverOptions, fit_glasso


@dataclass(frozen=True)
class ThresholdedEstimate:
    base: PrecisionEstimate
    tau: float
    theta_tilde: np.ndarray
    edges: EdgeSet
    # set by threshold_for_edge_count
    requested_edges: Optional[int] = None
    exhausted: bool = False

    @property
    def shortfall(self) -> int:
        """How many edges short of ``requested_edges`` the result is."""
        if self.requested_edges is None:
            return 0
        return max(0, self.requested_edges - len(self.edges))

    def as_estimate(self) -> PrecisionEstimate:
        return PrecisionEstimate(
            theta=self.theta_tilde, lam=self.base.lam, method="thresholded",
            iterations=self.base.iterations, converged=self.base.converged,
        )


def hard_threshold(base: PrecisionEstimate, tau: float) -> ThresholdedEstimate:
    """Zero every off-diagonal entry with ``|value| <= tau``.

    The diagonal is left untouched and no projection back to the positive
    definite cone is made.
    """
    if tau < 0 or math.isnan(tau):
        raise ValueError("tau must be non-negative")
    theta = np.asarray(base.theta)
    keep = np.abs(theta) > tau
    np.fill_diagonal(keep, True)
    tilde = np.where(keep, theta, 0.0)
    tilde.setflags(write=False)
    return ThresholdedEstimate(base=base, tau=float(tau), theta_tilde=tilde,
                               edges=edge_set(tilde, 0.0))


def _offdiag_magnitudes(theta) -> np.ndarray:
    theta = np.asarray(theta)
    iu = np.triu_indices(theta.shape[0], k=1)
    return np.abs(theta[iu])


def threshold_for_edge_count(base: PrecisionEstimate, k: int):
    """Smallest threshold leaving at most ``k`` edges.

    Candidate thresholds are the distinct off-diagonal magnitudes (and 0).
    Tied magnitudes are removed together, so the count may fall short of
    ``k`` but never exceeds it. Returns ``(tau, ThresholdedEstimate)``.
    """
    p = base.dim
    k = int(k)
    if not 0 <= k <= p * (p - 1) // 2:
        raise ValueError(f"k={k} out of range for p={p}")
    mags = _offdiag_magnitudes(base.theta)
    nz = np.sort(mags[mags > 0])[::-1]
    if k >= nz.size:
        tau = 0.0
    else:
        # keeping the top k requires tau >= nz[k]; all values tied with nz[k] go too
        tau = float(nz[k])
    out = hard_threshold(base, tau)
    out = ThresholdedEstimate(
        base=out.base, tau=out.tau, theta_tilde=out.theta_tilde, edges=out.edges,
        requested_edges=k, exhausted=k > nz.size,
    )
    return tau, out


def gaussian_loglik(theta, sigma_hat, n: int) -> float:
    """``(n/2) * (log det theta - tr(sigma_hat @ theta))``."""
    return 0.5 * n * (log_det(theta) - float(np.sum(np.asarray(sigma_hat) * theta)))


def ebic_score(edges: EdgeSet, refit_theta, sigma_hat, n: int,
               gamma_ebic: float = 0.5, extra_df: int = 0) -> float:
    """Extended BIC of a graph with likelihood evaluated at ``refit_theta``.

    ``extra_df`` adds free parameters outside the edge set (for instance
    those of a low-rank component), charged ``log n`` each.
    """
    if not 0 <= gamma_ebic <= 1:
        raise ValueError("gamma_ebic must lie in [0, 1]")
    p = np.asarray(sigma_hat).shape[0]
    e = len(edges)
    ll = gaussian_loglik(refit_theta, sigma_hat, n)
    return (-2.0 * ll + (e + extra_df) * math.log(n)
            + 4.0 * e * gamma_ebic * math.log(p))


@dataclass(frozen=True)
class Candidate:
    """One point of a tuning grid.

    ``theta`` is the matrix whose likelihood is scored; ``payload`` carries
    whatever the caller wants back (e.g. the thresholded estimate).
    """

    lam: float
    tau: float
    edges: EdgeSet
    theta: np.ndarray
    payload: Any = field(default=None, compare=False)


def select_by_ebic(candidates: Sequence[Candidate], sigma_hat, n: int,
                   gamma_ebic: float = 0.5):
    """Return ``(best_candidate, best_score)``.

    Ties go to the larger ``tau``, then the larger ``lam``.
    """
    if not candidates:
        raise ValueError("no candidates to select from")
    scored = [
        (ebic_score(c.edges, c.theta, sigma_hat, n, gamma_ebic), -c.tau, -c.lam, len(c.edges), i)
        for i, c in enumerate(candidates)
    ]
    best = min(scored, key=lambda t: t[:4])
    return candidates[best[4]], best[0]


DEFAULT_LAMBDA0_C = 0.1


def default_lambda0(n: int, p: int, c: float = DEFAULT_LAMBDA0_C) -> float:
    """``c * sqrt(log(p) / n)``."""
    if n < 2 or p < 2:
        raise ValueError("need n >= 2 and p >= 2")
    if not c > 0:
        raise ValueError("c must be positive")
    return c * math.sqrt(math.log(p) / n)


def kfold_indices(n: int, K: int, seed: int = 0) -> list:
    """Shuffle ``0..n-1`` with ``seed`` and cut into ``K`` contiguous blocks."""
    if K < 2:
        raise ValueError("K must be >= 2")
    if n < K:
        raise ValueError(f"cannot split {n} rows into {K} folds")
    perm = np.random.Generator(np.random.Philox(seed)).permutation(n)
    folds = np.array_split(perm, K)
    for f, idx in enumerate(folds):
        if idx.size < 2:
            raise ValueError(f"fold {f} has {idx.size} row(s); need at least 2")
    return folds


def cv_scores(data, lambdas: Sequence[float], K: int = 5, method: str = "glasso",
              opts: SolverOptions = SolverOptions(), seed: int = 0,
              gamma: float = 1.0) -> np.ndarray:
    """Mean held-out negative log-likelihood per lambda, shape ``(len(lambdas),)``.

    ``method`` is ``"glasso"`` or ``"lvglasso"`` (scored at ``S - L``, with
    the sparse/low-rank trade-off fixed at ``gamma``).
    """
    x = as_data_matrix(data)
    if method == "lvglasso":
        from .lvglasso import ADMMOptions

        lv_opts = ADMMOptions(tol=1e-5)
    folds = kfold_indices(x.shape[0], K, seed)
    lambdas = [float(v) for v in lambdas]
    scores = np.zeros((len(folds), len(lambdas)))
    for f, test in enumerate(folds):
        train = np.setdiff1d(np.arange(x.shape[0]), test)
        s_train = sample_covariance(x[train])
        s_test = sample_covariance(x[test])
        order = np.argsort(lambdas)[::-1]
        prev = None
        for i in order:
            if method == "glasso":
                prev = fit_glasso(s_train, lambdas[i], opts, init=prev)
                theta = prev.theta
            elif method == "lvglasso":
                from .lvglasso import fit_lvglasso

                prev = fit_lvglasso(s_train, lambdas[i], gamma, lv_opts, init=prev)
                theta = prev.s_hat - prev.l_hat
            else:
                raise ValueError(f"cross-validation not supported for {method!r}")
            scores[f, i] = float(np.sum(s_test * theta)) - log_det(theta)
    return scores.mean(axis=0)


def kfold_cv(data, lambdas: Sequence[float], K: int = 5, method: str = "glasso",
             opts: SolverOptions = SolverOptions(), seed: int = 0,
             gamma: float = 1.0) -> float:
    """Lambda minimizing the K-fold held-out negative log-likelihood.

    Ties go to the larger lambda.
    """
    if len(lambdas) == 0:
        raise ValueError("empty lambda grid")
    lambdas = [float(v) for v in lambdas]
    scores = cv_scores(data, lambdas, K, method, opts, seed, gamma)
    best = min(range(len(lambdas)), key=lambda i: (scores[i], -lambdas[i]))
    return lambdas[best]
