"""Compiled coordinate-descent kernels shared by the lasso-type solvers."""
import numpy as np
from numba import njit

# Status codes returned by the kernels.
OK = 0
NOT_PD = 1


@njit(cache=True)
def soft_threshold(x, t):
    if x > t:
        return x - t
    if x < -t:
        return x + t
    return 0.0


@njit(cache=True)
def lasso_gram_cd(G, c, lam, beta, excl, max_iter, tol):
    """Minimize 0.5 b'Gb - c'b + sum_k lam[k] |b_k| by cyclic coordinate descent.

    Coordinate ``excl`` (if >= 0) is held at zero. ``beta`` is updated in
    place and is used as the warm start. Returns (sweeps, converged).
    """
    p = c.shape[0]
    Gb = np.zeros(p)
    for k in range(p):
        bk = beta[k]
        if bk != 0.0:
            for l in range(p):
                Gb[l] += G[l, k] * bk
    for it in range(max_iter):
        max_delta = 0.0
        for k in range(p):
            if k == excl:
                continue
            gkk = G[k, k]
            old = beta[k]
            z = c[k] - Gb[k] + gkk * old
            new = soft_threshold(z, lam[k]) / gkk
            if new != old:
                d = new - old
                beta[k] = new
                for l in range(p):
                    Gb[l] += G[l, k] * d
                step = abs(d) * np.sqrt(gkk)
                if step > max_delta:
                    max_delta = step
        if max_delta <= tol:
            return it + 1, True
    return max_iter, False


@njit(cache=True)
def glasso_bcd(S, P, W, B, max_iter, tol_abs, inner_max_iter, inner_tol):
    """Block coordinate descent on the covariance estimate ``W``.

    ``P`` holds per-entry off-diagonal penalties (``inf`` pins an entry at
    zero). ``W`` and ``B`` (lasso coefficients, column ``j`` for node ``j``)
    are updated in place. Returns (theta, sweeps, converged, status).
    """
    p = S.shape[0]
    npairs = p * (p - 1)
    sweeps = 0
    converged = False
    for it in range(max_iter):
        change = 0.0
        for j in range(p):
            c = S[:, j].copy()
            lam = P[:, j].copy()
            beta = B[:, j].copy()
            beta[j] = 0.0
            lasso_gram_cd(W, c, lam, beta, j, inner_max_iter, inner_tol)
            for k in range(p):
                B[k, j] = beta[k]
            for k in range(p):
                if k == j:
                    continue
                w = 0.0
                for l in range(p):
                    if l != j:
                        w += W[k, l] * beta[l]
                change += abs(w - W[k, j])
                W[k, j] = w
                W[j, k] = w
        sweeps = it + 1
        if not np.isfinite(change):
            return np.zeros((p, p)), sweeps, False, NOT_PD
        if npairs == 0 or change / npairs <= tol_abs:
            converged = True
            break

    theta = np.zeros((p, p))
    for j in range(p):
        d = W[j, j]
        for k in range(p):
            if k != j:
                d -= W[k, j] * B[k, j]
        if not d > 0.0:
            return theta, sweeps, converged, NOT_PD
        tjj = 1.0 / d
        theta[j, j] = tjj
        for k in range(p):
            if k != j:
                theta[k, j] = -B[k, j] * tjj
    return theta, sweeps, converged, OK
