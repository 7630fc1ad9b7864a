"""Layers with hand-rolled forward/backward passes.

Shapes are batch-first: dense layers see (B, features), convolutional layers
see (B, length, channels).  Backward passes consume the cache written by the
most recent ``forward(..., cache=True)`` call, so one model instance must not
be trained from two threads at once; cache-free inference is safe to share.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

KERNEL_WIDTH = 3


def relu(z):
    return np.maximum(z, 0.0)


def sigmoid(z):
    # branch on sign to avoid overflow in exp for large |z|
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


_ACTIVATIONS = ("relu", "sigmoid", "none")


def _apply_activation(z, activation):
    if activation == "relu":
        return relu(z)
    if activation == "sigmoid":
        return sigmoid(z)
    return z


def _activation_grad(dout, z, y, activation):
    if activation == "relu":
        return dout * (z > 0)
    if activation == "sigmoid":
        return dout * y * (1.0 - y)
    return dout


def _check_activation(activation):
    if activation not in _ACTIVATIONS:
        raise ValueError(f"unknown activation {activation!r}; choose from {_ACTIVATIONS}")


def glorot_uniform(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Dense:
    """Fully connected layer: y = g(x @ w.T + b), w of shape (out, in)."""

    type_name = "dense"

    def __init__(self, n_in: int, n_out: int, activation: str = "none"):
        _check_activation(activation)
        self.n_in = n_in
        self.n_out = n_out
        self.activation = activation
        self.w = np.zeros((n_out, n_in))
        self.b = np.zeros(n_out)
        self._cache = None

    @property
    def n_params(self) -> int:
        return self.n_out * (self.n_in + 1)

    def init_params(self, rng):
        # biases share the weight range so no pre-activation starts exactly on
        # the ReLU kink, which would make finite-difference checks ill-posed
        self.w = glorot_uniform(rng, (self.n_out, self.n_in), self.n_in, self.n_out)
        self.b = glorot_uniform(rng, (self.n_out,), self.n_in, self.n_out)

    def params(self):
        return [self.w, self.b]

    def forward(self, x, cache=False):
        z = x @ self.w.T + self.b
        y = _apply_activation(z, self.activation)
        if cache:
            self._cache = (x, z, y)
        return y

    def backward(self, dout):
        x, z, y = self._cache
        self._cache = None
        dz = _activation_grad(dout, z, y, self.activation)
        dw = dz.T @ x
        db = dz.sum(axis=0)
        dx = dz @ self.w
        return dx, [dw, db]

    def out_shape(self, in_shape):
        if in_shape != (self.n_in,):
            raise ValueError(f"dense layer expects {self.n_in} inputs, got {in_shape}")
        return (self.n_out,)


class Conv1D:
    """1-D convolution, kernel width 3, stride 1, with optional zero padding.

    Kernels have shape (n_kernels, 3, in_channels) and each carries a bias,
    giving n_kernels * (3 * in_channels + 1) parameters.  With ``padding
    = "none"`` the output is two positions shorter than the input; with
    ``"same"`` one zero is padded on each side and the length is preserved.
    """

    type_name = "conv"

    def __init__(self, in_channels: int, n_kernels: int, padding: str = "same",
                 activation: str = "relu"):
        if padding not in ("none", "same"):
            raise ValueError(f"padding must be 'none' or 'same', got {padding!r}")
        _check_activation(activation)
        self.in_channels = in_channels
        self.n_kernels = n_kernels
        self.padding = padding
        self.activation = activation
        self.w = np.zeros((n_kernels, KERNEL_WIDTH, in_channels))
        self.b = np.zeros(n_kernels)
        self._cache = None

    @property
    def n_params(self) -> int:
        return self.n_kernels * (KERNEL_WIDTH * self.in_channels + 1)

    def init_params(self, rng):
        fan_in = KERNEL_WIDTH * self.in_channels
        fan_out = KERNEL_WIDTH * self.n_kernels
        self.w = glorot_uniform(rng, self.w.shape, fan_in, fan_out)
        self.b = glorot_uniform(rng, (self.n_kernels,), fan_in, fan_out)

    def params(self):
        return [self.w, self.b]

    def _pad(self, x):
        if self.padding == "same":
            return np.pad(x, ((0, 0), (1, 1), (0, 0)))
        return x

    def forward(self, x, cache=False):
        xp = self._pad(x)
        # windows[b, i, t, c] = xp[b, i + t, c]
        windows = sliding_window_view(xp, KERNEL_WIDTH, axis=1).transpose(0, 1, 3, 2)
        b_sz, out_len = windows.shape[0], windows.shape[1]
        win2 = np.ascontiguousarray(windows).reshape(b_sz, out_len, -1)
        w2 = self.w.reshape(self.n_kernels, -1)
        z = win2 @ w2.T + self.b
        y = _apply_activation(z, self.activation)
        if cache:
            self._cache = (x.shape, win2, z, y)
        return y

    def backward(self, dout):
        in_shape, win2, z, y = self._cache
        self._cache = None
        dz = _activation_grad(dout, z, y, self.activation)
        b_sz, out_len, _ = dz.shape
        dw = (dz.reshape(-1, self.n_kernels).T @ win2.reshape(b_sz * out_len, -1))
        dw = dw.reshape(self.w.shape)
        db = dz.sum(axis=(0, 1))
        pad_len = in_shape[1] + (2 if self.padding == "same" else 0)
        dxp = np.zeros((b_sz, pad_len, self.in_channels))
        for t in range(KERNEL_WIDTH):
            dxp[:, t : t + out_len, :] += dz @ self.w[:, t, :]
        dx = dxp[:, 1:-1, :] if self.padding == "same" else dxp
        return dx, [dw, db]

    def out_shape(self, in_shape):
        length, channels = in_shape
        if channels != self.in_channels:
            raise ValueError(
                f"conv layer expects {self.in_channels} channels, got {channels}"
            )
        out_len = length if self.padding == "same" else length - (KERNEL_WIDTH - 1)
        if out_len < 1:
            raise ValueError(f"input length {length} too short for unpadded width-3 kernel")
        return (out_len, self.n_kernels)


class Flatten:
    """(B, length, channels) -> (B, length * channels), position-major order."""

    type_name = "flatten"

    def __init__(self):
        self._shape = None

    @property
    def n_params(self) -> int:
        return 0

    def params(self):
        return []

    def forward(self, x, cache=False):
        if cache:
            self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        shape = self._shape
        self._shape = None
        return dout.reshape(shape), []

    def out_shape(self, in_shape):
        length, channels = in_shape
        return (length * channels,)
