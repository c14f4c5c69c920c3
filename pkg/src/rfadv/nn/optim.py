"""First-order optimizers updating parameter arrays in place."""

from __future__ import annotations

import numpy as np

from ..errors import NonFiniteGradientError


def _check_finite(grads, names):
    for i, g in enumerate(grads):
        if not np.all(np.isfinite(g)):
            label = names[i] if names is not None else f"parameter {i}"
            raise NonFiniteGradientError(f"non-finite gradient in {label}")


class SGD:
    """w <- w - lr * g."""

    def __init__(self, lr: float):
        if lr <= 0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        self.lr = lr

    def step(self, weights, grads, names=None):
        _check_finite(grads, names)
        for w, g in zip(weights, grads):
            w -= self.lr * g.astype(w.dtype, copy=False)


class Adam:
    """Adam with bias correction (Kingma & Ba defaults)."""

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        if lr <= 0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: list[np.ndarray] | None = None
        self._v: list[np.ndarray] | None = None

    def step(self, weights, grads, names=None):
        _check_finite(grads, names)
        if self._m is None:
            self._m = [np.zeros_like(w) for w in weights]
            self._v = [np.zeros_like(w) for w in weights]
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for w, g, m, v in zip(weights, grads, self._m, self._v):
            g = g.astype(w.dtype, copy=False)
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            w -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
