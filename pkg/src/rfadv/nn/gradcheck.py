"""Central finite-difference gradient checking (float64 mode)."""

from __future__ import annotations

import numpy as np

from .losses import cross_entropy
from .model import Model, backward


def numeric_input_grad(model: Model, x, target, h: float = 1e-4) -> np.ndarray:
    """(L(x + h e_i) - L(x - h e_i)) / 2h for every input entry."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        lp = cross_entropy(model.forward(x), target)
        flat[i] = orig - h
        lm = cross_entropy(model.forward(x), target)
        flat[i] = orig
        gflat[i] = (lp - lm) / (2.0 * h)
    return grad


def numeric_param_grads(model: Model, x, target, h: float = 1e-4):
    """Finite-difference gradient for every parameter array, model order."""
    grads = []
    for arr in model.parameter_arrays():
        g = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            lp = cross_entropy(model.forward(x), target)
            flat[i] = orig - h
            lm = cross_entropy(model.forward(x), target)
            flat[i] = orig
            gflat[i] = (lp - lm) / (2.0 * h)
        grads.append(g)
    return grads


def max_relative_error(analytic, numeric, floor: float = 1e-6) -> float:
    """Worst relative disagreement over entries larger than the floor."""
    analytic = np.asarray(analytic, dtype=np.float64).ravel()
    numeric = np.asarray(numeric, dtype=np.float64).ravel()
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    mask = scale > floor
    if not mask.any():
        return 0.0
    return float((np.abs(analytic - numeric)[mask] / scale[mask]).max())


def check_gradients(model: Model, x, target, h: float = 1e-4):
    """Return (input_rel_err, worst_param_rel_err) against finite differences."""
    report = backward(model, x, target)
    in_err = max_relative_error(report.input_grad, numeric_input_grad(model, x, target, h))
    param_err = 0.0
    numeric = numeric_param_grads(model, x, target, h)
    analytic = [g for layer in report.param_grads for g in layer.values()]
    for a, n in zip(analytic, numeric):
        param_err = max(param_err, max_relative_error(a, n))
    return in_err, param_err
