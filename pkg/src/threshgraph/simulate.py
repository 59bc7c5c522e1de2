"""Ground-truth precision matrices, latent augmentation and Gaussian sampling.

All randomness goes through :func:`make_rng`, a Philox counter-based
generator, so streams are reproducible across platforms. The generator name
is recorded as :data:`RNG_NAME` in serialized specs.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    NotPositiveDefiniteError,
    as_symmetric,
    edge_set,
    spd_inverse,
)

RNG_NAME = f"numpy.Philox/numpy-{np.__version__.split('.')[0]}"
DEFAULT_MARGIN = 0.1


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


# --------------------------------------------------------------------------
# observed-graph generators

def watts_strogatz_edges(p: int, k: int, beta: float, rng: np.random.Generator) -> set:
    """Edge set of a Watts-Strogatz graph; rewiring keeps the edge count at p*k/2."""
    if k % 2 or k < 2:
        raise ValueError("k must be an even integer >= 2")
    if k >= p:
        raise ValueError(f"k={k} must be smaller than p={p}")
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    adj = [set() for _ in range(p)]
    for i in range(p):
        for j in range(1, k // 2 + 1):
            t = (i + j) % p
            adj[i].add(t)
            adj[t].add(i)
    for j in range(1, k // 2 + 1):
        for i in range(p):
            t = (i + j) % p
            if rng.random() >= beta or t not in adj[i]:
                continue
            free = [w for w in range(p) if w != i and w not in adj[i]]
            if not free:
                continue
            w = free[int(rng.integers(len(free)))]
            adj[i].discard(t)
            adj[t].discard(i)
            adj[i].add(w)
            adj[w].add(i)
    return {(min(i, j), max(i, j)) for i in range(p) for j in adj[i]}


def _with_pd_diagonal(off: np.ndarray, margin: float) -> np.ndarray:
    lam_min = float(np.linalg.eigvalsh(off)[0])
    theta = off + (abs(lam_min) + margin) * np.eye(off.shape[0])
    return as_symmetric(theta, symmetrize=True)


def small_world_precision(p: int, k: int = 2, beta: float = 0.1, weight: float = 1.0,
                          seed: int = 0, margin: float = DEFAULT_MARGIN) -> np.ndarray:
    """Small-world precision matrix with ``weight`` on every edge.

    The common diagonal is ``|lambda_min(off-diagonal part)| + margin``.
    """
    edges = watts_strogatz_edges(p, k, beta, make_rng(seed))
    off = np.zeros((p, p))
    for i, j in edges:
        off[i, j] = off[j, i] = weight
    return _with_pd_diagonal(off, margin)


def chain_precision(p: int, weight: float = 1.0, margin: float = DEFAULT_MARGIN) -> np.ndarray:
    """Tridiagonal precision matrix (a path graph on ``p`` nodes)."""
    if p < 2:
        raise ValueError("p must be >= 2")
    off = np.zeros((p, p))
    idx = np.arange(p - 1)
    off[idx, idx + 1] = off[idx + 1, idx] = weight
    c = 2.0 * abs(weight) * math.cos(math.pi / (p + 1)) + margin
    return as_symmetric(off + c * np.eye(p))


# --------------------------------------------------------------------------
# latent augmentation

@dataclass(frozen=True)
class GraphSpec:
    """Joint precision ``[[theta_o, theta_oh], [theta_oh.T, theta_h]]`` and derived quantities."""

    theta_o: np.ndarray
    theta_oh: np.ndarray
    theta_h: np.ndarray
    sigma_o: np.ndarray
    eta: float
    diagnostics: dict = field(default_factory=dict)
    knobs: dict = field(default_factory=dict)
    seed: Optional[int] = None

    @property
    def p_o(self) -> int:
        return self.theta_o.shape[0]

    @property
    def p_h(self) -> int:
        return self.theta_h.shape[0]

    def full_theta(self) -> np.ndarray:
        return np.block([[self.theta_o, self.theta_oh],
                         [self.theta_oh.T, self.theta_h]])

    def low_rank(self) -> np.ndarray:
        """``L* = theta_oh @ inv(theta_h) @ theta_oh.T``."""
        return _low_rank(self.theta_oh, self.theta_h)

    def true_edges(self):
        return edge_set(self.theta_o, 0.0)

    def to_json(self) -> str:
        doc = {
            "p_o": self.p_o,
            "p_h": self.p_h,
            "theta_o": self.theta_o.tolist(),
            "theta_oh": self.theta_oh.tolist(),
            "theta_h": self.theta_h.tolist(),
            "sigma_o": self.sigma_o.tolist(),
            "eta": self.eta,
            "diagnostics": self.diagnostics,
            "knobs": self.knobs,
            "seed": self.seed,
            "rng": RNG_NAME,
        }
        return json.dumps(doc, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GraphSpec":
        doc = json.loads(text)
        p_o, p_h = doc["p_o"], doc["p_h"]
        return cls(
            theta_o=np.array(doc["theta_o"], dtype=float).reshape(p_o, p_o),
            theta_oh=np.array(doc["theta_oh"], dtype=float).reshape(p_o, p_h),
            theta_h=np.array(doc["theta_h"], dtype=float).reshape(p_h, p_h),
            sigma_o=np.array(doc["sigma_o"], dtype=float).reshape(p_o, p_o),
            eta=float(doc["eta"]),
            diagnostics=doc.get("diagnostics", {}),
            knobs=doc.get("knobs", {}),
            seed=doc.get("seed"),
        )


def _low_rank(theta_oh, theta_h) -> np.ndarray:
    p_o = theta_oh.shape[0]
    if theta_h.shape[0] == 0:
        return np.zeros((p_o, p_o))
    if not np.any(theta_oh):
        return np.zeros((p_o, p_o))
    L = theta_oh @ np.linalg.solve(theta_h, theta_oh.T)
    return (L + L.T) / 2.0


def _sparsify(values: np.ndarray, fraction: float, rng) -> np.ndarray:
    """Zero ``round(fraction * size)`` entries chosen uniformly at random.

    The zeroed entries are a prefix of one seeded permutation, so patterns
    for increasing ``fraction`` under the same seed are nested.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("sparsity fraction must lie in [0, 1]")
    out = values.copy()
    m = int(round(fraction * out.size))
    if m:
        out[rng.permutation(out.size)[:m]] = 0.0
    return out


def _hidden_block(p_h, h_diag, h_offdiag_magnitude, h_sparsity, rng):
    theta_h = np.zeros((p_h, p_h))
    iu = np.triu_indices(p_h, k=1)
    vals = _sparsify(np.full(iu[0].size, float(h_offdiag_magnitude)), h_sparsity, rng)
    theta_h[iu] = vals
    theta_h = theta_h + theta_h.T
    theta_h[np.diag_indices(p_h)] = h_diag
    return theta_h


def calibrate_h_diag(theta_o, theta_oh, h_offdiag=None, ratio: float = 0.5,
                     tol: float = 1e-10) -> float:
    """Smallest hidden diagonal keeping the marginal precision well conditioned.

    Returns the smallest ``h`` for which ``lambda_min(theta_o - L*(h))`` is at
    least ``ratio * lambda_min(theta_o)`` (found by bisection; ``L*`` shrinks
    monotonically in ``h``).
    """
    p_h = theta_oh.shape[1]
    if p_h == 0:
        return 1.0
    off = np.zeros((p_h, p_h)) if h_offdiag is None else np.asarray(h_offdiag)
    target = ratio * float(np.linalg.eigvalsh(theta_o)[0])

    def ok(h):
        th = off + h * np.eye(p_h)
        if np.linalg.eigvalsh(th)[0] <= 0:
            return False
        return np.linalg.eigvalsh(theta_o - _low_rank(theta_oh, th))[0] >= target

    lo = max(0.0, -float(np.linalg.eigvalsh(off)[0]))
    hi = max(1.0, 2.0 * lo)
    if not np.any(theta_oh):
        # no coupling: any PD hidden block leaves the marginal untouched
        return hi
    while not ok(hi):
        hi *= 2.0
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def latent_spec(theta_o, p_h: int = 20, oh_magnitude: float = 0.2,
                h_diag: Optional[float] = None, oh_sparsity: float = 0.0,
                h_sparsity: float = 0.0, h_offdiag_magnitude: float = 0.0,
                seed: int = 0, margin: float = DEFAULT_MARGIN) -> GraphSpec:
    """Attach ``p_h`` hidden nodes to ``theta_o`` and marginalize them out.

    ``theta_oh`` starts dense at ``oh_magnitude`` with a random
    ``oh_sparsity`` fraction of entries zeroed; the hidden block has
    ``h_diag`` on its diagonal and ``h_offdiag_magnitude`` on a random
    ``1 - h_sparsity`` fraction of its off-diagonal pairs. ``h_diag=None``
    picks the value from :func:`calibrate_h_diag`. If the joint matrix is
    not positive definite, its whole diagonal is raised so that the
    smallest eigenvalue equals ``margin``.
    """
    theta_o = np.array(as_symmetric(theta_o))
    p_o = theta_o.shape[0]
    if p_h < 0:
        raise ValueError("p_h must be >= 0")
    rng = make_rng(seed)
    theta_oh = _sparsify(np.full(p_o * p_h, float(oh_magnitude)), oh_sparsity, rng)
    theta_oh = theta_oh.reshape(p_o, p_h)
    theta_h = _hidden_block(p_h, 0.0, h_offdiag_magnitude, h_sparsity, rng)
    if p_h > 0:
        if h_diag is None:
            h_diag = calibrate_h_diag(theta_o, theta_oh, theta_h)
        if not h_diag > 0:
            raise ValueError("h_diag must be positive when p_h > 0")
        theta_h[np.diag_indices(p_h)] = h_diag

    full = np.block([[theta_o, theta_oh], [theta_oh.T, theta_h]])
    lam_min = float(np.linalg.eigvalsh(full)[0])
    raised = 0.0
    if lam_min <= 0 and p_h > 0:
        raised = margin - lam_min
        theta_o = theta_o + raised * np.eye(p_o)
        theta_h = theta_h + raised * np.eye(p_h)
    return build_spec(
        theta_o, theta_oh, theta_h, seed=seed,
        knobs={"p_h": p_h, "oh_magnitude": oh_magnitude, "h_diag": h_diag,
               "oh_sparsity": oh_sparsity, "h_sparsity": h_sparsity,
               "h_offdiag_magnitude": h_offdiag_magnitude, "margin": margin,
               "diagonal_raise": raised},
    )


def build_spec(theta_o, theta_oh, theta_h, seed=None, knobs=None) -> GraphSpec:
    """Assemble a :class:`GraphSpec` from explicit blocks."""
    theta_o = np.array(as_symmetric(theta_o))
    theta_oh = np.asarray(theta_oh, dtype=float).reshape(theta_o.shape[0], -1)
    theta_h = np.array(as_symmetric(np.asarray(theta_h, dtype=float).reshape(
        theta_oh.shape[1], theta_oh.shape[1])))
    full = np.block([[theta_o, theta_oh], [theta_oh.T, theta_h]])
    full_eigs = np.linalg.eigvalsh(full)
    if full_eigs[0] <= 0:
        raise NotPositiveDefiniteError(full_eigs[0], "joint precision")
    marg = _marginal(theta_o, theta_oh, theta_h)
    sigma_o = np.array(spd_inverse(marg))
    L = _low_rank(theta_oh, theta_h)
    eta_val = _eta_direct(theta_o, L)

    te = edge_set(theta_o, 0.0)
    deg = np.zeros(theta_o.shape[0], dtype=int)
    for i, j in te:
        deg[i] += 1
        deg[j] += 1
    o_eigs = np.linalg.eigvalsh(theta_o)
    s_eigs = np.linalg.eigvalsh(sigma_o)
    diagnostics = {
        "edge_count": len(te),
        "max_degree": int(deg.max()) if deg.size else 0,
        "theta_min": float(min(abs(theta_o[i, j]) for i, j in te)) if len(te) else 0.0,
        "theta_o_eig_min": float(o_eigs[0]),
        "theta_o_eig_max": float(o_eigs[-1]),
        "theta_eig_min": float(full_eigs[0]),
        "theta_eig_max": float(full_eigs[-1]),
        "sigma_o_eig_min": float(s_eigs[0]),
        "sigma_o_eig_max": float(s_eigs[-1]),
        "rank_l": int(np.sum(np.linalg.eigvalsh(L) > 1e-10)) if L.size else 0,
    }
    for a in (theta_o, theta_oh, theta_h, sigma_o):
        a.setflags(write=False)
    return GraphSpec(theta_o=theta_o, theta_oh=theta_oh, theta_h=theta_h,
                     sigma_o=sigma_o, eta=eta_val, diagnostics=diagnostics,
                     knobs=dict(knobs or {}), seed=seed)


def _marginal(theta_o, theta_oh, theta_h) -> np.ndarray:
    return as_symmetric(theta_o - _low_rank(theta_oh, theta_h), symmetrize=True)


def marginal_precision(spec: GraphSpec) -> np.ndarray:
    """Schur complement ``theta_o - theta_oh @ inv(theta_h) @ theta_oh.T``."""
    if spec.p_h and np.linalg.eigvalsh(spec.theta_h)[0] <= 0:
        raise NotPositiveDefiniteError(np.linalg.eigvalsh(spec.theta_h)[0], "theta_h")
    return _marginal(spec.theta_o, spec.theta_oh, spec.theta_h)


def marginal_precision_by_inversion(spec: GraphSpec) -> np.ndarray:
    """Invert the joint precision, keep the observed block, invert back."""
    sigma = np.linalg.inv(spec.full_theta())
    p_o = spec.p_o
    return np.linalg.inv(sigma[:p_o, :p_o])


def _eta_direct(S, L) -> float:
    if not np.any(L):
        return 0.0
    diff = np.linalg.inv(S - L) - np.linalg.inv(S)
    return float(np.abs(diff).max())


def eta(spec: GraphSpec) -> float:
    """``max |inv(S* - L*) - inv(S*)|`` with ``S* = theta_o``."""
    return _eta_direct(np.asarray(spec.theta_o), spec.low_rank())


def eta_product_form(spec: GraphSpec) -> float:
    """Same quantity via ``inv(S - L) @ L @ inv(S)``."""
    S = np.asarray(spec.theta_o)
    L = spec.low_rank()
    return float(np.abs(np.linalg.inv(S - L) @ L @ np.linalg.inv(S)).max())


# --------------------------------------------------------------------------
# sampling

def sample_mvn(sigma, n: int, seed: int) -> np.ndarray:
    """``n`` draws from ``N(0, sigma)``: standard normals times the Cholesky factor."""
    if n < 1:
        raise ValueError("n must be >= 1")
    sigma = np.asarray(sigma, dtype=float)
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(np.linalg.eigvalsh(sigma)[0], "sigma") from None
    z = make_rng(seed).standard_normal((n, sigma.shape[0]))
    return z @ chol.T
