"""Layers for the small single-sample network engine.

Tensors are plain numpy arrays in C order, one sample at a time (no batch
axis). Spatial inputs use (height, width, channels). Each layer knows its
output shape, owns its parameter arrays and implements an exact backward
pass; a forward call optionally appends whatever backward will need to a
caller-supplied cache list, so inference never mutates layer state.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatchError


class Layer:
    """Base layer: stateless by default, parameters in ``self.params``."""

    kind = "layer"

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.in_shape: tuple[int, ...] | None = None
        self.out_shape: tuple[int, ...] | None = None

    def build(self, in_shape, rng, dtype):
        """Fix shapes and initialize parameters. Called once by the model."""
        self.in_shape = tuple(in_shape)
        self.out_shape = tuple(in_shape)

    def forward(self, x, cache=None, train=False, rng=None):
        raise NotImplementedError

    def backward(self, dout, cached):
        """Return (dx, param_grads). param_grads keys mirror self.params."""
        raise NotImplementedError


def glorot_uniform(rng, shape, fan_in, fan_out, dtype):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class Dense(Layer):
    kind = "dense"

    def __init__(self, units: int):
        super().__init__()
        self.units = units

    def build(self, in_shape, rng, dtype):
        if len(in_shape) != 1:
            raise ShapeMismatchError(
                f"dense expects a flat input, got shape {tuple(in_shape)}"
            )
        n_in = in_shape[0]
        self.in_shape = (n_in,)
        self.out_shape = (self.units,)
        self.params = {
            "weight": glorot_uniform(rng, (n_in, self.units), n_in, self.units, dtype),
            "bias": np.zeros(self.units, dtype=dtype),
        }

    def forward(self, x, cache=None, train=False, rng=None):
        y = x @ self.params["weight"] + self.params["bias"]
        if cache is not None:
            cache.append(x)
        return y

    def backward(self, dout, cached):
        x = cached
        grads = {"weight": np.outer(x, dout), "bias": dout.copy()}
        dx = self.params["weight"] @ dout
        return dx, grads

    def input_backward(self, dout, cached):
        return self.params["weight"] @ dout


class Conv2D(Layer):
    """2-D convolution, stride 1, 'valid' or 'same' padding.

    'same' uses the TensorFlow convention: total padding k-1 per axis,
    split with the extra row/column on the bottom/right.
    """

    kind = "conv2d"

    def __init__(self, filters: int, kernel: tuple[int, int], padding: str = "same"):
        super().__init__()
        if padding not in ("same", "valid"):
            raise ValueError(f"padding must be 'same' or 'valid', got {padding!r}")
        self.filters = filters
        self.kernel = tuple(kernel)
        self.padding = padding

    def build(self, in_shape, rng, dtype):
        if len(in_shape) != 3:
            raise ShapeMismatchError(
                f"conv2d expects (height, width, channels), got {tuple(in_shape)}"
            )
        h, w, c_in = in_shape
        kh, kw = self.kernel
        if self.padding == "same":
            self._pad = ((kh - 1) // 2, kh - 1 - (kh - 1) // 2,
                         (kw - 1) // 2, kw - 1 - (kw - 1) // 2)
            out_h, out_w = h, w
        else:
            self._pad = (0, 0, 0, 0)
            out_h, out_w = h - kh + 1, w - kw + 1
        if out_h < 1 or out_w < 1:
            raise ShapeMismatchError(
                f"kernel {self.kernel} does not fit input {tuple(in_shape)}"
            )
        self.in_shape = tuple(in_shape)
        self.out_shape = (out_h, out_w, self.filters)
        fan_in = kh * kw * c_in
        fan_out = kh * kw * self.filters
        self.params = {
            "kernel": glorot_uniform(
                rng, (kh, kw, c_in, self.filters), fan_in, fan_out, dtype
            ),
            "bias": np.zeros(self.filters, dtype=dtype),
        }
        # Gather indices mapping each output position to its kh*kw patch
        # rows in the padded input; fixed once shapes are known.
        ph = h + self._pad[0] + self._pad[1]
        pw = w + self._pad[2] + self._pad[3]
        self._padded_hw = (ph, pw)
        ii = np.arange(out_h)[:, None, None, None]
        jj = np.arange(out_w)[None, :, None, None]
        aa = np.arange(kh)[None, None, :, None]
        bb = np.arange(kw)[None, None, None, :]
        self._gather = ((ii + aa) * pw + (jj + bb)).reshape(out_h * out_w, kh * kw)

    def _pad_input(self, x):
        pt, pb, pl, pr = self._pad
        if pt or pb or pl or pr:
            return np.pad(x, ((pt, pb), (pl, pr), (0, 0)))
        return x

    def forward(self, x, cache=None, train=False, rng=None):
        kh, kw = self.kernel
        c_in = self.in_shape[2]
        xp = self._pad_input(x)
        cols = xp.reshape(-1, c_in)[self._gather].reshape(-1, kh * kw * c_in)
        kmat = self.params["kernel"].reshape(kh * kw * c_in, self.filters)
        y = cols @ kmat + self.params["bias"]
        if cache is not None:
            cache.append(cols)
        return y.reshape(self.out_shape)

    def backward(self, dout, cached):
        cols = cached
        kh, kw = self.kernel
        c_in = self.in_shape[2]
        out_h, out_w, _ = self.out_shape
        d2 = dout.reshape(out_h * out_w, self.filters)
        grads = {
            "kernel": (d2.T @ cols).T.reshape(self.params["kernel"].shape),
            "bias": d2.sum(axis=0),
        }
        return self._input_grad(d2), grads

    def input_backward(self, dout, cached):
        out_h, out_w, _ = self.out_shape
        return self._input_grad(dout.reshape(out_h * out_w, self.filters))

    def _input_grad(self, d2):
        kh, kw = self.kernel
        c_in = self.in_shape[2]
        out_h, out_w, _ = self.out_shape
        kmat = self.params["kernel"].reshape(kh * kw * c_in, self.filters)
        dcols = (d2 @ kmat.T).reshape(out_h, out_w, kh, kw, c_in)
        ph, pw = self._padded_hw
        dxp = np.zeros((ph, pw, c_in), dtype=d2.dtype)
        for a in range(kh):
            for b in range(kw):
                dxp[a:a + out_h, b:b + out_w] += dcols[:, :, a, b]
        pt, pb, pl, pr = self._pad
        h, w, _ = self.in_shape
        return dxp[pt:pt + h, pl:pl + w]


class ReLU(Layer):
    kind = "relu"

    def forward(self, x, cache=None, train=False, rng=None):
        if cache is not None:
            cache.append(x > 0)
        return np.maximum(x, 0)

    def backward(self, dout, cached):
        return dout * cached, {}

    def input_backward(self, dout, cached):
        return dout * cached


class Dropout(Layer):
    """Inverted dropout; identity in inference mode."""

    kind = "dropout"

    def __init__(self, rate: float):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate

    def forward(self, x, cache=None, train=False, rng=None):
        if not train or self.rate == 0.0:
            if cache is not None:
                cache.append(None)
            return x
        keep = 1.0 - self.rate
        mask = (rng.random(x.shape) < keep).astype(x.dtype) / keep
        if cache is not None:
            cache.append(mask)
        return x * mask

    def backward(self, dout, cached):
        return (dout if cached is None else dout * cached), {}

    def input_backward(self, dout, cached):
        return dout if cached is None else dout * cached


class Softmax(Layer):
    """Max-subtracted softmax over the final flat vector."""

    kind = "softmax"

    def forward(self, x, cache=None, train=False, rng=None):
        z = x - x.max()
        e = np.exp(z)
        p = e / e.sum()
        if cache is not None:
            cache.append(p)
        return p

    def backward(self, dout, cached):
        p = cached
        return p * (dout - float(p @ dout)), {}

    def input_backward(self, dout, cached):
        p = cached
        return p * (dout - float(p @ dout))


class Reshape(Layer):
    """Reshape to a fixed target; (-1,) flattens."""

    kind = "reshape"

    def __init__(self, target: tuple[int, ...]):
        super().__init__()
        self.target = tuple(target)

    def build(self, in_shape, rng, dtype):
        self.in_shape = tuple(in_shape)
        n = int(np.prod(in_shape))
        if self.target == (-1,):
            self.out_shape = (n,)
        else:
            if int(np.prod(self.target)) != n:
                raise ShapeMismatchError(
                    f"cannot reshape {tuple(in_shape)} to {self.target}"
                )
            self.out_shape = self.target

    def forward(self, x, cache=None, train=False, rng=None):
        if cache is not None:
            cache.append(None)
        return x.reshape(self.out_shape)

    def backward(self, dout, cached):
        return dout.reshape(self.in_shape), {}

    def input_backward(self, dout, cached):
        return dout.reshape(self.in_shape)
