"""Edge-recovery scores."""
from __future__ import annotations

from typing import NamedTuple, Optional, Sequence

import numpy as np

from .core import EdgeSet


class Confusion(NamedTuple):
    tp: int
    fp: int
    fn: int
    tn: int


def confusion(est: EdgeSet, truth: EdgeSet) -> Confusion:
    """Counts over all ``p(p-1)/2`` unordered pairs."""
    if est.dim != truth.dim:
        raise ValueError(f"dimension mismatch: {est.dim} vs {truth.dim}")
    total = truth.dim * (truth.dim - 1) // 2
    tp = len(est.edges & truth.edges)
    fp = len(est.edges) - tp
    fn = len(truth.edges) - tp
    return Confusion(tp, fp, fn, total - tp - fp - fn)


def f1(c) -> float:
    """``TP / (TP + (FP + FN) / 2)``; 1.0 when there is nothing to find and nothing found."""
    tp, fp, fn = c[0], c[1], c[2]
    if tp == 0:
        return 1.0 if fp + fn == 0 else 0.0
    return tp / (tp + 0.5 * (fp + fn))


def f1_score(est: EdgeSet, truth: EdgeSet) -> float:
    return f1(confusion(est, truth))


def _sign(m, tol):
    m = np.asarray(m, dtype=float)
    return np.where(m > tol, 1, np.where(m < -tol, -1, 0))


def sign_consistency(est, truth, tol: float = 0.0) -> bool:
    """True iff every off-diagonal entry has the same sign in ``est`` and ``truth``."""
    est = np.asarray(est)
    truth = np.asarray(truth)
    if est.shape != truth.shape:
        raise ValueError(f"shape mismatch: {est.shape} vs {truth.shape}")
    off = ~np.eye(est.shape[0], dtype=bool)
    return bool(np.array_equal(_sign(est, tol)[off], _sign(truth, tol)[off]))


def tuning_share(edges: EdgeSet, labels: Sequence) -> Optional[float]:
    """Fraction of edges whose two endpoints carry the same label.

    Returns ``None`` for an empty edge set.
    """
    if len(labels) != edges.dim:
        raise ValueError(f"{len(labels)} labels for {edges.dim} nodes")
    if not len(edges):
        return None
    same = sum(1 for i, j in edges.edges if labels[i] == labels[j])
    return same / len(edges)
