"""Cross-entropy risks with base-2 logarithms, signed as written (non-positive)."""

import numpy as np

from ..errors import ShapeMismatch

EPS = 1e-12


def cce_loss(true_onehot, predicted) -> float:
    """Mean over rows of ``sum_j p_ij log2 q_ij``.

    Predicted probabilities are clamped to ``[EPS, 1 - EPS]``. The value is
    non-positive; a trainer minimizes its negation.
    """
    p = np.asarray(true_onehot, dtype=float)
    q = np.asarray(predicted, dtype=float)
    if p.shape != q.shape or p.ndim != 2:
        raise ShapeMismatch(f"{p.shape} vs {q.shape}")
    q = np.clip(q, EPS, 1.0 - EPS)
    return float(np.sum(p * np.log2(q)) / p.shape[0])


def bce_loss(true, predicted) -> float:
    """Mean of ``p log2 q + (1 - p) log2 (1 - q)``."""
    p = np.asarray(true, dtype=float).ravel()
    q = np.asarray(predicted, dtype=float).ravel()
    if p.shape != q.shape:
        raise ShapeMismatch(f"{p.shape} vs {q.shape}")
    q = np.clip(q, EPS, 1.0 - EPS)
    return float(np.mean(p * np.log2(q) + (1.0 - p) * np.log2(1.0 - q)))
