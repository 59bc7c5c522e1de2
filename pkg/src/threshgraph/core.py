"""Shared numeric types and dense symmetric linear algebra.

Matrices are plain ``numpy.ndarray`` objects. The validating constructors
(:func:`as_symmetric`, :func:`as_data_matrix`) return read-only float64
copies so that fitted results can be shared without defensive copying.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, Iterable, Tuple

import numpy as np

DEFAULT_EDGE_TOL = 1e-8
PD_TOL = 1e-12


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a matrix required to be positive definite is not.

    The smallest eigenvalue found is kept on ``min_eigenvalue``.
    """

    def __init__(self, min_eigenvalue: float, what: str = "matrix"):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(
            f"{what} is not positive definite "
            f"(smallest eigenvalue {self.min_eigenvalue:.3e})"
        )


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_symmetric(m, *, symmetrize: bool = False) -> np.ndarray:
    """Validate ``m`` as a square symmetric matrix.

    Asymmetric input raises ``ValueError`` unless ``symmetrize`` is set, in
    which case ``(m + m.T) / 2`` is returned.
    """
    a = np.array(m, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    if symmetrize:
        a = (a + a.T) / 2.0
    elif not np.array_equal(a, a.T):
        raise ValueError("matrix is not symmetric")
    return _frozen(a)


def symmetrize(m) -> np.ndarray:
    """Return ``(m + m.T) / 2`` as a validated symmetric matrix."""
    return as_symmetric(m, symmetrize=True)


def as_data_matrix(x) -> np.ndarray:
    """Validate an ``n x p`` observation matrix (n >= 2, finite)."""
    a = np.array(x, dtype=float, copy=True)
    if a.ndim != 2:
        raise ValueError(f"data must be 2-dimensional, got shape {a.shape}")
    if a.shape[0] < 2:
        raise ValueError("data needs at least 2 rows")
    bad = np.argwhere(~np.isfinite(a))
    if bad.size:
        i, j = bad[0]
        raise ValueError(f"non-finite entry at row {i}, column {j}")
    return _frozen(a)


@dataclass(frozen=True)
class EdgeSet:
    """Unordered off-diagonal index pairs ``(i, j)`` with ``i < j``."""

    dim: int
    edges: FrozenSet[Tuple[int, int]]

    def __post_init__(self):
        edges = frozenset((int(min(i, j)), int(max(i, j))) for i, j in self.edges)
        for i, j in edges:
            if i == j:
                raise ValueError(f"diagonal pair ({i}, {j}) is not an edge")
            if i < 0 or j >= self.dim:
                raise ValueError(f"pair ({i}, {j}) out of range for dim {self.dim}")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_pairs(cls, dim: int, pairs: Iterable[Tuple[int, int]]) -> "EdgeSet":
        return cls(dim, frozenset(pairs))

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self):
        return iter(sorted(self.edges))

    def __contains__(self, pair) -> bool:
        i, j = pair
        return (min(i, j), max(i, j)) in self.edges

    def issubset(self, other: "EdgeSet") -> bool:
        return self.edges <= other.edges

    def to_mask(self) -> np.ndarray:
        """Boolean symmetric adjacency matrix with a false diagonal."""
        mask = np.zeros((self.dim, self.dim), dtype=bool)
        for i, j in self.edges:
            mask[i, j] = mask[j, i] = True
        return mask


def sample_covariance(data, center: bool = True, ddof: int = 0) -> np.ndarray:
    """Sample covariance with denominator ``n - ddof`` (``n`` by default).

    With ``center=False`` the raw second-moment matrix ``X.T @ X / n`` is
    returned.
    """
    x = as_data_matrix(data)
    n = x.shape[0]
    if ddof not in (0, 1):
        raise ValueError("ddof must be 0 or 1")
    if center:
        x = x - x.mean(axis=0)
    cov = x.T @ x / (n - ddof)
    return as_symmetric(cov, symmetrize=True)


def to_correlation(cov) -> np.ndarray:
    c = np.asarray(cov, dtype=float)
    d = np.diag(c)
    if np.any(d <= 0):
        bad = int(np.flatnonzero(d <= 0)[0])
        raise ValueError(f"variable {bad} has non-positive variance {d[bad]}")
    s = 1.0 / np.sqrt(d)
    r = c * s[:, None] * s[None, :]
    np.fill_diagonal(r, 1.0)
    return as_symmetric(r, symmetrize=True)


def edge_set(m, tol: float = DEFAULT_EDGE_TOL) -> EdgeSet:
    """Pairs ``i < j`` with ``|m[i, j]| > tol``."""
    a = np.asarray(m)
    if tol < 0:
        raise ValueError("tol must be non-negative")
    iu, ju = np.triu_indices(a.shape[0], k=1)
    keep = np.abs(a[iu, ju]) > tol
    return EdgeSet(a.shape[0], frozenset(zip(iu[keep].tolist(), ju[keep].tolist())))


def sym_eigen(m) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns)."""
    w, v = np.linalg.eigh(np.asarray(m, dtype=float))
    return w, v


def min_eigenvalue(m) -> float:
    return float(np.linalg.eigvalsh(np.asarray(m, dtype=float))[0])


def _check_pd(m, what: str = "matrix") -> np.ndarray:
    a = np.asarray(m, dtype=float)
    w = np.linalg.eigvalsh(a)
    if w[0] <= PD_TOL * max(1.0, abs(w[-1])):
        raise NotPositiveDefiniteError(w[0], what)
    return w


def spd_inverse(m) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix via Cholesky."""
    a = np.asarray(m, dtype=float)
    try:
        c = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(min_eigenvalue(a)) from None
    _check_pd(a)
    ci = np.linalg.inv(c)
    inv = ci.T @ ci
    return as_symmetric(inv, symmetrize=True)


def log_det(m) -> float:
    """Log-determinant of a symmetric positive definite matrix."""
    a = np.asarray(m, dtype=float)
    try:
        c = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(min_eigenvalue(a)) from None
    return float(2.0 * np.sum(np.log(np.diag(c))))


def is_positive_definite(m) -> bool:
    try:
        np.linalg.cholesky(np.asarray(m, dtype=float))
    except np.linalg.LinAlgError:
        return False
    return True
