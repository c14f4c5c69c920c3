"""Model container plus forward / backward entry points.

A built model is immutable in inference mode: forward and backward never
write to layer state, so a single model can be shared by concurrent
evaluation workers. Training (optimizer steps, dropout) requires exclusive
access.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeMismatchError
from .layers import Layer
from .losses import cross_entropy, cross_entropy_grad


@dataclass
class GradientReport:
    """Exact gradients of cross_entropy(forward(model, x), target).

    param_grads mirrors Model weight structure (one dict per layer, empty
    for stateless layers); input_grad has the shape of x. When a report is
    produced with want_param_grads=False the param_grads list is empty.
    """

    param_grads: list[dict[str, np.ndarray]]
    input_grad: np.ndarray
    loss_value: float


class Model:
    """Ordered layer stack mapping one input tensor to a class distribution."""

    def __init__(self, layers: list[Layer], input_shape, num_classes: int,
                 name: str = "model", seed: int = 0, dtype=np.float32):
        self.layers = layers
        self.input_shape = tuple(input_shape)
        self.num_classes = num_classes
        self.name = name
        self.dtype = np.dtype(dtype)
        rng = np.random.default_rng(seed)
        shape = self.input_shape
        for layer in layers:
            layer.build(shape, rng, self.dtype)
            shape = layer.out_shape
        if shape != (num_classes,):
            raise ShapeMismatchError(
                f"layer stack ends with shape {shape}, expected ({num_classes},)"
            )

    def _check_input(self, x):
        x = np.asarray(x, dtype=self.dtype)
        if x.shape != self.input_shape:
            raise ShapeMismatchError(
                f"model {self.name!r} expects input shape {self.input_shape}, "
                f"got {x.shape}"
            )
        return x

    def forward(self, x, train=False, rng=None, caches=None):
        x = self._check_input(x)
        for layer in self.layers:
            x = layer.forward(x, cache=caches, train=train, rng=rng)
        return x

    def predict_label(self, x) -> int:
        """Index of the maximal output; ties resolve to the lowest index."""
        return int(np.argmax(self.forward(x)))

    def parameters(self):
        """Yield (name, array) pairs in a stable order."""
        for i, layer in enumerate(self.layers):
            for pname, arr in layer.params.items():
                yield f"{i}.{layer.kind}.{pname}", arr

    def parameter_arrays(self):
        return [arr for _, arr in self.parameters()]

    def parameter_names(self):
        return [name for name, _ in self.parameters()]

    def num_parameters(self) -> int:
        return sum(arr.size for arr in self.parameter_arrays())

    def set_parameters(self, arrays):
        arrays = list(arrays)
        own = self.parameter_arrays()
        if len(arrays) != len(own):
            raise ShapeMismatchError(
                f"expected {len(own)} parameter arrays, got {len(arrays)}"
            )
        for dst, src in zip(own, arrays):
            if dst.shape != src.shape:
                raise ShapeMismatchError(
                    f"parameter shape {src.shape} does not match {dst.shape}"
                )
            dst[...] = src


def forward(model: Model, x) -> np.ndarray:
    """Softmax output of the model for one input, inference mode."""
    return model.forward(x)


def predict_label(model: Model, x) -> int:
    return model.predict_label(x)


def one_hot(index: int, num_classes: int, dtype=np.float64) -> np.ndarray:
    v = np.zeros(num_classes, dtype=dtype)
    v[index] = 1.0
    return v


def backward(model: Model, x, target, want_param_grads: bool = True,
             train=False, rng=None) -> GradientReport:
    """Gradients of the cross-entropy loss w.r.t. parameters and the input.

    The loss is cross_entropy(forward(model, x), target) including the
    probability clamp, so the returned gradients are exact for the value
    backward reports as loss_value.
    """
    x = model._check_input(x)
    target = np.asarray(target, dtype=np.float64)
    caches: list = []
    out = x
    for layer in model.layers:
        out = layer.forward(out, cache=caches, train=train, rng=rng)
    loss = cross_entropy(out, target)
    delta = cross_entropy_grad(out, target).astype(model.dtype)
    param_grads: list[dict[str, np.ndarray]] = []
    for layer, cached in zip(reversed(model.layers), reversed(caches)):
        if want_param_grads:
            delta, grads = layer.backward(delta, cached)
            param_grads.append(grads)
        else:
            delta = layer.input_backward(delta, cached)
    param_grads.reverse()
    return GradientReport(param_grads=param_grads, input_grad=delta,
                          loss_value=loss)


def input_gradient(model: Model, x, target) -> np.ndarray:
    """Input gradient only; skips parameter-gradient work on the hot path."""
    return backward(model, x, target, want_param_grads=False).input_grad
