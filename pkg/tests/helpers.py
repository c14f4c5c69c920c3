"""Shared toy models and builders for the test suite."""

import numpy as np

from rfadv import nn


def dense_model(weight_stack, softmax=True, dtype=np.float64, relu_between=False):
    """Model from explicit dense weight matrices (biases zero)."""
    layers = []
    for i, w in enumerate(weight_stack):
        layers.append(nn.Dense(w.shape[1]))
        if relu_between and i < len(weight_stack) - 1:
            layers.append(nn.ReLU())
    if softmax:
        layers.append(nn.Softmax())
    model = nn.Model(layers, (weight_stack[0].shape[0],),
                     weight_stack[-1].shape[1], name="toy", dtype=dtype)
    dense_layers = [l for l in model.layers if isinstance(l, nn.Dense)]
    for layer, w in zip(dense_layers, weight_stack):
        layer.params["weight"][...] = w
        layer.params["bias"][...] = 0.0
    return model


def toy_logistic(w=1.0):
    """1-D two-class model with its decision boundary at x = 0; class 0
    is predicted on the positive side."""
    return dense_model([np.array([[w, -w]], dtype=np.float64)])


def random_toy_2d(seed, hidden=None):
    """Random 2-D-input classifier; linear when hidden is None."""
    rng = np.random.default_rng(seed)
    if hidden is None:
        w = rng.standard_normal((2, 3))
        return dense_model([w])
    w1 = rng.standard_normal((2, hidden))
    w2 = rng.standard_normal((hidden, 3))
    return dense_model([w1, w2], relu_between=True)


GRADCHECK_ARCHS = {
    "dense": lambda: ([nn.Dense(5), nn.ReLU(), nn.Dense(3), nn.Softmax()], (4,)),
    "conv_same": lambda: ([nn.Conv2D(3, (2, 3), padding="same"), nn.ReLU(),
                           nn.Reshape((-1,)), nn.Dense(3), nn.Softmax()],
                          (3, 5, 2)),
    "conv_valid": lambda: ([nn.Conv2D(2, (2, 2), padding="valid"), nn.ReLU(),
                            nn.Reshape((-1,)), nn.Dense(3), nn.Softmax()],
                           (3, 4, 2)),
    "relu": lambda: ([nn.Dense(6), nn.ReLU(), nn.Dense(3), nn.Softmax()], (5,)),
    "dropout": lambda: ([nn.Dense(6), nn.ReLU(), nn.Dropout(0.5),
                         nn.Dense(3), nn.Softmax()], (5,)),
    "reshape": lambda: ([nn.Reshape((-1,)), nn.Dense(4), nn.ReLU(),
                         nn.Dense(3), nn.Softmax()], (2, 3, 1)),
    "softmax": lambda: ([nn.Dense(3), nn.Softmax()], (3,)),
}


def _kink_margin(model, x):
    """Smallest |pre-activation| feeding any ReLU along the forward pass."""
    margin = np.inf
    out = np.asarray(x, dtype=model.dtype)
    for layer in model.layers:
        if isinstance(layer, nn.ReLU):
            margin = min(margin, float(np.abs(out).min()))
        out = layer.forward(out)
    return margin


def gradcheck_instance(arch: str, seed: int):
    """Small random f64 model + input + one-hot target for gradient checks.

    Central differences with h=1e-4 are only a valid oracle away from ReLU
    kinks, so instances with a pre-activation inside the stencil window are
    resampled.
    """
    for attempt in range(100):
        s = seed + 7919 * attempt
        layers, in_shape = GRADCHECK_ARCHS[arch]()
        model = nn.Model(layers, in_shape, 3, name=f"gc-{arch}",
                         seed=s, dtype=np.float64)
        rng = np.random.default_rng(s + 1000)
        x = rng.standard_normal(in_shape)
        target = nn.one_hot(int(rng.integers(0, 3)), 3)
        if _kink_margin(model, x) > 1e-3:
            return model, x, target
    raise RuntimeError(f"no kink-free instance found for {arch}")
