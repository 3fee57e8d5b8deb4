"""Activation functions and their vector-Jacobian products."""

from __future__ import annotations

import numpy as np

ACTIVATION_NAMES = ("relu", "tanh", "sigmoid", "softmax")


def sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    z = x - x.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def _relu_f(x):
    return np.maximum(x, 0.0)


def _relu_vjp(d, x, y):
    return d * (x > 0)


def _tanh_f(x):
    return np.tanh(x)


def _tanh_vjp(d, x, y):
    return d * (1.0 - y * y)


def _sigmoid_vjp(d, x, y):
    return d * y * (1.0 - y)


def _softmax_f(x):
    return softmax(x, axis=-1)


def _softmax_vjp(d, x, y):
    return y * (d - (d * y).sum(axis=-1, keepdims=True))


_TABLE = {
    "relu": (_relu_f, _relu_vjp),
    "tanh": (_tanh_f, _tanh_vjp),
    "sigmoid": (sigmoid, _sigmoid_vjp),
    "softmax": (_softmax_f, _softmax_vjp),
}


def activation(name: str, x) -> np.ndarray:
    """Apply a named activation; softmax normalizes along the last axis."""
    if name not in _TABLE:
        raise ValueError(f"unknown activation {name!r}, expected one of {ACTIVATION_NAMES}")
    return _TABLE[name][0](np.asarray(x, dtype=np.float64))


def activation_pair(name: str):
    """(forward, vjp) pair; vjp signature is (dout, x_in, y_out)."""
    if name not in _TABLE:
        raise ValueError(f"unknown activation {name!r}, expected one of {ACTIVATION_NAMES}")
    return _TABLE[name]
