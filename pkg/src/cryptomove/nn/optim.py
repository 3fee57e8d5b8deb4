"""Textbook first-order update rules operating on named parameter dicts.

Parameters are updated in place so the owning layers see every step. State
(moment estimates) is keyed by parameter name and created lazily.
"""

from __future__ import annotations

import numpy as np

OPTIMIZER_NAMES = ("sgd", "rmsprop", "adam", "adamax", "nadam")

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


class Optimizer:
    def __init__(self, params: dict, learning_rate: float):
        if learning_rate < 0:
            raise ValueError("learning rate must be non-negative")
        self.params = params
        self.lr = learning_rate
        self.t = 0
        self.state: dict = {}

    def step(self, grads: dict) -> None:
        self.t += 1
        for name, p in self.params.items():
            self._update(name, p, grads[name])

    def _update(self, name, p, g):
        raise NotImplementedError

    def _slot(self, name, p, count):
        slot = self.state.get(name)
        if slot is None:
            slot = tuple(np.zeros_like(p) for _ in range(count))
            self.state[name] = slot
        return slot


class SGD(Optimizer):
    def _update(self, name, p, g):
        p -= self.lr * g


class RMSProp(Optimizer):
    RHO = 0.9

    def _update(self, name, p, g):
        (v,) = self._slot(name, p, 1)
        v *= self.RHO
        v += (1.0 - self.RHO) * g * g
        p -= self.lr * g / (np.sqrt(v) + EPSILON)


class Adam(Optimizer):
    def _update(self, name, p, g):
        m, v = self._slot(name, p, 2)
        m *= BETA1
        m += (1.0 - BETA1) * g
        v *= BETA2
        v += (1.0 - BETA2) * g * g
        mhat = m / (1.0 - BETA1**self.t)
        vhat = v / (1.0 - BETA2**self.t)
        p -= self.lr * mhat / (np.sqrt(vhat) + EPSILON)


class Adamax(Optimizer):
    def _update(self, name, p, g):
        m, u = self._slot(name, p, 2)
        m *= BETA1
        m += (1.0 - BETA1) * g
        np.maximum(BETA2 * u, np.abs(g), out=u)
        p -= (self.lr / (1.0 - BETA1**self.t)) * m / (u + EPSILON)


class Nadam(Optimizer):
    def _update(self, name, p, g):
        m, v = self._slot(name, p, 2)
        m *= BETA1
        m += (1.0 - BETA1) * g
        v *= BETA2
        v += (1.0 - BETA2) * g * g
        mhat = m / (1.0 - BETA1**self.t)
        vhat = v / (1.0 - BETA2**self.t)
        lookahead = BETA1 * mhat + (1.0 - BETA1) * g / (1.0 - BETA1**self.t)
        p -= self.lr * lookahead / (np.sqrt(vhat) + EPSILON)


_CLASSES = {
    "sgd": SGD,
    "rmsprop": RMSProp,
    "adam": Adam,
    "adamax": Adamax,
    "nadam": Nadam,
}


def make_optimizer(name: str, params: dict, learning_rate: float = 1e-3) -> Optimizer:
    key = name.lower()
    if key not in _CLASSES:
        raise ValueError(f"unknown optimizer {name!r}, expected one of {OPTIMIZER_NAMES}")
    return _CLASSES[key](params, learning_rate)
