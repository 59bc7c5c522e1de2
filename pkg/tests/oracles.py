"""Independent reference solvers used only by the tests.

None of these share code with the package: they are slow, simple methods
(first-order descent, brute-force vertex enumeration, explicit loops) whose
correctness is easy to check by eye.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def two_pass_covariance(rows):
    """Centered covariance with denominator n, by explicit two-pass loops."""
    n = len(rows)
    p = len(rows[0])
    mean = [math.fsum(r[j] for r in rows) / n for j in range(p)]
    out = [[0.0] * p for _ in range(p)]
    for a in range(p):
        for b in range(p):
            out[a][b] = math.fsum((r[a] - mean[a]) * (r[b] - mean[b]) for r in rows) / n
    return out


def normal_equations(X, y):
    """Least squares via the normal equations."""
    return np.linalg.solve(X.T @ X, X.T @ y)


def _logdet_or_inf(M):
    try:
        c = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        return None
    return 2.0 * np.sum(np.log(np.diag(c)))


def _soft_off(A, t):
    out = np.sign(A) * np.maximum(np.abs(A) - t, 0.0)
    np.fill_diagonal(out, np.diag(A))
    return out


def glasso_objective(theta, S, lam):
    ld = _logdet_or_inf(theta)
    if ld is None:
        return math.inf
    off = np.abs(theta).sum() - np.abs(np.diag(theta)).sum()
    return float(np.sum(S * theta) - ld + lam * off)


def glasso_prox_gradient(S, lam, iters=200000, tol=1e-14):
    """Proximal gradient with backtracking on ``tr(S T) - logdet T + lam |T|_off``."""
    p = S.shape[0]
    T = np.diag(1.0 / np.diag(S))
    step = 1.0
    f_prev = glasso_objective(T, S, lam)
    for _ in range(iters):
        G = S - np.linalg.inv(T)
        smooth = np.sum(S * T) - _logdet_or_inf(T)
        while True:
            Tn = _soft_off(T - step * G, step * lam)
            Tn = (Tn + Tn.T) / 2
            ld = _logdet_or_inf(Tn)
            if ld is not None:
                D = Tn - T
                q = smooth + np.sum(G * D) + np.sum(D * D) / (2 * step)
                if np.sum(S * Tn) - ld <= q + 1e-15:
                    break
            step /= 2
        T = Tn
        f = glasso_objective(T, S, lam)
        if abs(f_prev - f) < tol and np.abs(D).max() < 1e-12:
            break
        f_prev = f
        step *= 1.5
    return T


def lv_objective(S, L, Sig, lam, gamma):
    ld = _logdet_or_inf(S - L)
    if ld is None:
        return math.inf
    off = np.abs(S).sum() - np.abs(np.diag(S)).sum()
    return float(np.sum((S - L) * Sig) - ld + lam * (gamma * off + np.trace(L)))


def _psd_project(A):
    w, V = np.linalg.eigh((A + A.T) / 2)
    return (V * np.maximum(w, 0.0)) @ V.T


def lv_prox_gradient(Sig, lam, gamma, iters=200000, tol=1e-15):
    """Proximal gradient on (S, L) for the latent-variable objective."""
    p = Sig.shape[0]
    S = np.diag(2.0 / np.diag(Sig))
    L = np.zeros((p, p))
    step = 1.0
    f_prev = lv_objective(S, L, Sig, lam, gamma)
    for _ in range(iters):
        R = S - L
        G = Sig - np.linalg.inv(R)
        gS, gL = G, -G + lam * np.eye(p)
        smooth = np.sum(R * Sig) - _logdet_or_inf(R) + lam * np.trace(L)
        while True:
            Sn = _soft_off(S - step * gS, step * lam * gamma)
            Sn = (Sn + Sn.T) / 2
            Ln = _psd_project(L - step * gL)
            ld = _logdet_or_inf(Sn - Ln)
            if ld is not None:
                dS, dL = Sn - S, Ln - L
                q = smooth + np.sum(gS * dS) + np.sum(gL * dL) + (np.sum(dS ** 2) + np.sum(dL ** 2)) / (2 * step)
                if np.sum((Sn - Ln) * Sig) - ld + lam * np.trace(Ln) <= q + 1e-15:
                    break
            step /= 2
        S, L = Sn, Ln
        f = lv_objective(S, L, Sig, lam, gamma)
        if abs(f_prev - f) < tol:
            break
        f_prev = f
        step *= 1.5
    return S, L, lv_objective(S, L, Sig, lam, gamma)


def lv_projected_subgradient(Sig, lam, gamma, iters=20000, step0=0.05):
    """Projected subgradient with 1/sqrt(k) steps; returns the best objective seen."""
    p = Sig.shape[0]
    S = np.diag(2.0 / np.diag(Sig))
    L = np.zeros((p, p))
    best = lv_objective(S, L, Sig, lam, gamma)
    off = ~np.eye(p, dtype=bool)
    for k in range(1, iters + 1):
        G = Sig - np.linalg.inv(S - L)
        gS = G + lam * gamma * np.sign(S) * off
        gL = -G + lam * np.eye(p)
        t = step0 / math.sqrt(k)
        while True:
            Sn = S - t * gS
            Sn = (Sn + Sn.T) / 2
            Ln = _psd_project(L - t * gL)
            if _logdet_or_inf(Sn - Ln) is not None:
                break
            t /= 2
        S, L = Sn, Ln
        best = min(best, lv_objective(S, L, Sig, lam, gamma))
    return best


def clime_column_vertex_enumeration(S, j, lam, feas_tol=1e-9):
    """Optimal value of the CLIME column LP by enumerating basic feasible solutions.

    Variables ``x = (u, v) >= 0`` with ``w = u - v``; constraints
    ``S w - e_j <= lam`` and ``-(S w - e_j) <= lam``. Returns ``(value, w)``.
    """
    p = S.shape[0]
    e = np.zeros(p)
    e[j] = 1.0
    A = np.vstack([np.hstack([S, -S]), np.hstack([-S, S]), -np.eye(2 * p)])
    b = np.concatenate([lam + e, lam - e, np.zeros(2 * p)])
    m, d = A.shape
    best_val, best_w = math.inf, None
    for rows in itertools.combinations(range(m), d):
        Ab = A[list(rows)]
        if abs(np.linalg.det(Ab)) < 1e-12:
            continue
        x = np.linalg.solve(Ab, b[list(rows)])
        if np.all(A @ x <= b + feas_tol):
            val = float(x.sum())
            if val < best_val:
                best_val, best_w = val, x[:p] - x[p:]
    return best_val, best_w


def random_spd(rng, p, cond_shift=0.5):
    A = rng.standard_normal((p, p))
    M = A @ A.T / p + cond_shift * np.eye(p)
    return (M + M.T) / 2
