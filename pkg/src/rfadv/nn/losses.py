"""Categorical cross-entropy on clamped probabilities."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatchError

PROB_CLAMP = 1e-12


def cross_entropy(pred, target) -> float:
    """-sum(target * ln(max(pred, 1e-12))); nonnegative for distributions."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeMismatchError(
            f"pred has length {pred.shape}, target has length {target.shape}"
        )
    return float(-(target * np.log(np.maximum(pred, PROB_CLAMP))).sum())


def cross_entropy_grad(pred, target) -> np.ndarray:
    """d(cross_entropy)/d(pred), zero where the clamp is active."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    active = pred > PROB_CLAMP
    return np.where(active, -target / np.maximum(pred, PROB_CLAMP), 0.0)
