"""Differentiable layers with explicit forward/backward passes.

Every layer exposes params() and grads() as name -> array dicts; backward()
overwrites the gradient arrays, so callers read them immediately after the
pass. Sequence tensors are channels-last: (batch, time, features).
"""

from __future__ import annotations

import numpy as np

from .activations import activation_pair, sigmoid, softmax


def glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    def params(self) -> dict:
        return {}

    def grads(self) -> dict:
        return {}

    def buffers(self) -> dict:
        """Non-trainable state that must survive save/load (e.g. running stats)."""
        return {}

    def forward(self, x, train: bool):
        raise NotImplementedError

    def backward(self, dout):
        raise NotImplementedError


class Dense(Layer):
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        self.W = glorot(rng, (in_dim, out_dim), in_dim, out_dim)
        self.b = np.zeros(out_dim)
        self.dW = np.zeros_like(self.W)
        self.db = np.zeros_like(self.b)

    def params(self):
        return {"W": self.W, "b": self.b}

    def grads(self):
        return {"W": self.dW, "b": self.db}

    def forward(self, x, train):
        if x.ndim != 2 or x.shape[1] != self.W.shape[0]:
            raise ValueError(f"dense layer expects (batch, {self.W.shape[0]}), got {x.shape}")
        self._x = x
        return x @ self.W + self.b

    def backward(self, dout):
        self.dW = self._x.T @ dout
        self.db = dout.sum(axis=0)
        return dout @ self.W.T


class Activation(Layer):
    def __init__(self, name: str):
        self.name = name
        self._f, self._vjp = activation_pair(name)

    def forward(self, x, train):
        self._x = x
        self._y = self._f(x)
        return self._y

    def backward(self, dout):
        return self._vjp(dout, self._x, self._y)


class Flatten(Layer):
    def forward(self, x, train):
        self._shape = x.shape
        return x.reshape(len(x), -1)

    def backward(self, dout):
        return dout.reshape(self._shape)


class DimensionShuffle(Layer):
    """Transpose (batch, time, vars) to (batch, vars, time)."""

    def forward(self, x, train):
        return dimension_shuffle(x)

    def backward(self, dout):
        return dout.transpose(0, 2, 1)


def dimension_shuffle(x) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 3:
        raise ValueError(f"dimension shuffle expects a rank-3 tensor, got rank {x.ndim}")
    return x.transpose(0, 2, 1)


class Conv1D(Layer):
    """1-D convolution with stride 1 and same padding.

    Same padding puts (k-1)//2 zeros before the sequence and k//2 after, so
    the output length equals the input length for any kernel size. A layer
    feeding a normalizer should set use_bias=False: mean subtraction cancels
    any constant channel offset, leaving the bias without a gradient.
    """

    def __init__(self, in_channels: int, filters: int, kernel: int, rng: np.random.Generator, use_bias: bool = True):
        self.kernel = kernel
        self.use_bias = use_bias
        self.W = glorot(rng, (kernel, in_channels, filters), kernel * in_channels, kernel * filters)
        self.dW = np.zeros_like(self.W)
        if use_bias:
            self.b = np.zeros(filters)
            self.db = np.zeros_like(self.b)

    def params(self):
        return {"W": self.W, "b": self.b} if self.use_bias else {"W": self.W}

    def grads(self):
        return {"W": self.dW, "b": self.db} if self.use_bias else {"W": self.dW}

    def forward(self, x, train):
        k, c_in, c_out = self.W.shape
        if x.ndim != 3 or x.shape[2] != c_in:
            raise ValueError(f"conv layer expects (batch, time, {c_in}), got {x.shape}")
        b, t, _ = x.shape
        pl, pr = (k - 1) // 2, k // 2
        xp = np.pad(x, ((0, 0), (pl, pr), (0, 0)))
        win = np.lib.stride_tricks.sliding_window_view(xp, k, axis=1)  # (b, t, c_in, k)
        cols = win.transpose(0, 1, 3, 2).reshape(b, t, k * c_in)
        self._cols, self._pads, self._t = cols, (pl, pr), t
        out = cols @ self.W.reshape(k * c_in, c_out)
        return out + self.b if self.use_bias else out

    def backward(self, dout):
        k, c_in, c_out = self.W.shape
        b, t, _ = dout.shape
        cols2 = self._cols.reshape(b * t, k * c_in)
        self.dW = (cols2.T @ dout.reshape(b * t, c_out)).reshape(k, c_in, c_out)
        if self.use_bias:
            self.db = dout.sum(axis=(0, 1))
        dcols = (dout @ self.W.reshape(k * c_in, c_out).T).reshape(b, t, k, c_in)
        pl, pr = self._pads
        dxp = np.zeros((b, t + pl + pr, c_in))
        for j in range(k):
            dxp[:, j : j + t, :] += dcols[:, :, j, :]
        return dxp[:, pl : pl + t, :]


class MaxPool1D(Layer):
    """Max pooling with window 2 along time; odd tails keep their last value."""

    def forward(self, x, train):
        b, t, c = x.shape
        self._t = t
        t2 = (t + 1) // 2
        if t % 2:
            x = np.concatenate([x, np.full((b, 1, c), -np.inf)], axis=1)
        r = x.reshape(b, t2, 2, c)
        self._argmax = r.argmax(axis=2)
        return r.max(axis=2)

    def backward(self, dout):
        b, t2, c = dout.shape
        dr = np.zeros((b, t2, 2, c))
        np.put_along_axis(dr, self._argmax[:, :, None, :], dout[:, :, None, :], axis=2)
        return dr.reshape(b, 2 * t2, c)[:, : self._t, :]


class GlobalAveragePool(Layer):
    def forward(self, x, train):
        self._t = x.shape[1]
        return x.mean(axis=1)

    def backward(self, dout):
        return np.repeat(dout[:, None, :], self._t, axis=1) / self._t


class BatchNorm(Layer):
    """Per-channel batch normalization over all leading axes.

    Training mode normalizes with the batch statistics (biased variance) and
    folds them into running estimates with momentum 0.99; inference uses the
    running estimates.
    """

    EPS = 1e-5
    MOMENTUM = 0.99

    def __init__(self, channels: int):
        self.gamma = np.ones(channels)
        self.beta = np.zeros(channels)
        self.dgamma = np.zeros(channels)
        self.dbeta = np.zeros(channels)
        self.run_mean = np.zeros(channels)
        self.run_var = np.ones(channels)

    def params(self):
        return {"gamma": self.gamma, "beta": self.beta}

    def grads(self):
        return {"gamma": self.dgamma, "beta": self.dbeta}

    def buffers(self):
        return {"run_mean": self.run_mean, "run_var": self.run_var}

    def forward(self, x, train):
        axes = tuple(range(x.ndim - 1))
        if train:
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            self.run_mean *= self.MOMENTUM
            self.run_mean += (1.0 - self.MOMENTUM) * mean
            self.run_var *= self.MOMENTUM
            self.run_var += (1.0 - self.MOMENTUM) * var
        else:
            mean, var = self.run_mean, self.run_var
        inv = 1.0 / np.sqrt(var + self.EPS)
        xhat = (x - mean) * inv
        self._cache = (xhat, inv, axes, train, int(np.prod([x.shape[a] for a in axes])))
        return self.gamma * xhat + self.beta

    def backward(self, dout):
        xhat, inv, axes, train, n = self._cache
        self.dgamma = (dout * xhat).sum(axis=axes)
        self.dbeta = dout.sum(axis=axes)
        dxhat = dout * self.gamma
        if not train:
            return dxhat * inv
        return (inv / n) * (
            n * dxhat
            - dxhat.sum(axis=axes, keepdims=True)
            - xhat * (dxhat * xhat).sum(axis=axes, keepdims=True)
        )


_GATES = ("f", "i", "g", "o")
_STEP_KEYS = tuple(f"{m}_{g}" for g in _GATES for m in ("U", "W"))


def lstm_step(params: dict, x_t, h_prev, c_prev):
    """One recurrent cell update with bias-free gates.

    f and i and o are logistic gates on (x U_* + h_prev W_*); the candidate
    and the cell output use tanh. Returns (h_t, c_t).
    """
    missing = [k for k in _STEP_KEYS if k not in params]
    if missing:
        raise ValueError(f"missing gate weights: {', '.join(missing)}")
    x_t, h_prev, c_prev = (np.asarray(a, dtype=np.float64) for a in (x_t, h_prev, c_prev))
    d, u = params["U_f"].shape
    if x_t.shape[-1] != d or h_prev.shape[-1] != u or c_prev.shape[-1] != u:
        raise ValueError(
            f"shape mismatch: x has {x_t.shape[-1]} features (weights expect {d}), "
            f"state has {h_prev.shape[-1]}/{c_prev.shape[-1]} units (weights expect {u})"
        )
    f = sigmoid(x_t @ params["U_f"] + h_prev @ params["W_f"])
    i = sigmoid(x_t @ params["U_i"] + h_prev @ params["W_i"])
    g = np.tanh(x_t @ params["U_g"] + h_prev @ params["W_g"])
    o = sigmoid(x_t @ params["U_o"] + h_prev @ params["W_o"])
    c_t = f * c_prev + i * g
    h_t = np.tanh(c_t) * o
    return h_t, c_t


class LSTMLayer(Layer):
    """Recurrent layer with bias-free gates and full backprop through time.

    The activation name replaces tanh in the candidate transform and the cell
    output; the three gates stay logistic.
    """

    def __init__(
        self,
        in_dim: int,
        units: int,
        rng: np.random.Generator,
        activation: str = "tanh",
        return_sequences: bool = False,
    ):
        self.units = units
        self.return_sequences = return_sequences
        self._act_f, self._act_vjp = activation_pair(activation)
        self.U = {g: glorot(rng, (in_dim, units), in_dim, units) for g in _GATES}
        self.W = {g: glorot(rng, (units, units), units, units) for g in _GATES}
        self.dU = {g: np.zeros_like(self.U[g]) for g in _GATES}
        self.dW = {g: np.zeros_like(self.W[g]) for g in _GATES}

    def params(self):
        out = {}
        for g in _GATES:
            out[f"U_{g}"] = self.U[g]
            out[f"W_{g}"] = self.W[g]
        return out

    def grads(self):
        out = {}
        for g in _GATES:
            out[f"U_{g}"] = self.dU[g]
            out[f"W_{g}"] = self.dW[g]
        return out

    def forward(self, x, train):
        if x.ndim != 3 or x.shape[2] != self.U["f"].shape[0]:
            raise ValueError(f"lstm expects (batch, time, {self.U['f'].shape[0]}), got {x.shape}")
        b, t, _ = x.shape
        h = np.zeros((b, self.units))
        c = np.zeros((b, self.units))
        self._x = x
        self._steps = []
        outputs = np.empty((b, t, self.units))
        for step in range(t):
            x_t = x[:, step, :]
            f = sigmoid(x_t @ self.U["f"] + h @ self.W["f"])
            i = sigmoid(x_t @ self.U["i"] + h @ self.W["i"])
            a_g = x_t @ self.U["g"] + h @ self.W["g"]
            g = self._act_f(a_g)
            o = sigmoid(x_t @ self.U["o"] + h @ self.W["o"])
            c_new = f * c + i * g
            act_c = self._act_f(c_new)
            self._steps.append((x_t, h, c, f, i, a_g, g, o, c_new, act_c))
            h = act_c * o
            c = c_new
            outputs[:, step, :] = h
        self._outputs = outputs
        return outputs if self.return_sequences else outputs[:, -1, :]

    def backward(self, dout):
        x = self._x
        b, t, _ = x.shape
        for g in _GATES:
            self.dU[g] = np.zeros_like(self.U[g])
            self.dW[g] = np.zeros_like(self.W[g])
        dx = np.zeros_like(x)
        dh_next = np.zeros((b, self.units))
        dc_next = np.zeros((b, self.units))
        for step in reversed(range(t)):
            x_t, h_prev, c_prev, f, i, a_g, g, o, c_new, act_c = self._steps[step]
            if self.return_sequences:
                dh = dout[:, step, :] + dh_next
            else:
                dh = dh_next + (dout if step == t - 1 else 0.0)
            do = dh * act_c
            dact_c = dh * o
            dc = self._act_vjp(dact_c, c_new, act_c) + dc_next
            df = dc * c_prev
            di = dc * g
            dg = dc * i
            dc_next = dc * f
            da = {
                "f": df * f * (1.0 - f),
                "i": di * i * (1.0 - i),
                "g": self._act_vjp(dg, a_g, g),
                "o": do * o * (1.0 - o),
            }
            dh_next = np.zeros((b, self.units))
            for gate in _GATES:
                self.dU[gate] += x_t.T @ da[gate]
                self.dW[gate] += h_prev.T @ da[gate]
                dx[:, step, :] += da[gate] @ self.U[gate].T
                dh_next += da[gate] @ self.W[gate].T
        return dx


def attention_context(encoder_states, s_prev, W_a, U_a, V_a):
    """Additive attention: e(j) = V_a . tanh(U_a s_prev + W_a h_j).

    Accepts a single sequence (M, units) with s_prev (units,) or a batch
    (batch, M, units) with s_prev (batch, units). Returns (e, alpha, context)
    with matching leading dimensions; alpha rows sum to 1.
    """
    h = np.asarray(encoder_states, dtype=np.float64)
    s = np.asarray(s_prev, dtype=np.float64)
    single = h.ndim == 2
    if single:
        h, s = h[None], s[None]
    if h.ndim != 3 or s.ndim != 2 or h.shape[2] != W_a.shape[0] or s.shape[1] != U_a.shape[0]:
        raise ValueError("attention shapes inconsistent with weight matrices")
    th = np.tanh((s @ U_a)[:, None, :] + h @ W_a)
    e = th @ V_a
    alpha = softmax(e, axis=1)
    context = (alpha[..., None] * h).sum(axis=1)
    if single:
        return e[0], alpha[0], context[0]
    return e, alpha, context


class AttentionPool(Layer):
    """Attention over the recurrent states, queried by the final state.

    Produces the context vector c = sum_j alpha_j h_j where the alignment of
    each state is scored against the last state of the sequence.
    """

    def __init__(self, units: int, rng: np.random.Generator):
        self.W_a = glorot(rng, (units, units), units, units)
        self.U_a = glorot(rng, (units, units), units, units)
        self.V_a = glorot(rng, (units,), units, 1)
        self.dW_a = np.zeros_like(self.W_a)
        self.dU_a = np.zeros_like(self.U_a)
        self.dV_a = np.zeros_like(self.V_a)

    def params(self):
        return {"W_a": self.W_a, "U_a": self.U_a, "V_a": self.V_a}

    def grads(self):
        return {"W_a": self.dW_a, "U_a": self.dU_a, "V_a": self.dV_a}

    def forward(self, x, train):
        if x.ndim != 3:
            raise ValueError(f"attention expects (batch, time, units), got {x.shape}")
        s = x[:, -1, :]
        th = np.tanh((s @ self.U_a)[:, None, :] + x @ self.W_a)
        e = th @ self.V_a
        alpha = softmax(e, axis=1)
        self._cache = (x, s, th, alpha)
        return (alpha[..., None] * x).sum(axis=1)

    def backward(self, dout):
        x, s, th, alpha = self._cache
        dalpha = (dout[:, None, :] * x).sum(axis=2)
        dx = alpha[..., None] * dout[:, None, :]
        de = alpha * (dalpha - (dalpha * alpha).sum(axis=1, keepdims=True))
        self.dV_a = (th * de[..., None]).sum(axis=(0, 1))
        dth = de[..., None] * self.V_a
        dpre = dth * (1.0 - th * th)
        self.dW_a = np.einsum("bmu,bma->ua", x, dpre)
        dx += dpre @ self.W_a.T
        dpre_sum = dpre.sum(axis=1)
        self.dU_a = s.T @ dpre_sum
        dx[:, -1, :] += dpre_sum @ self.U_a.T
        return dx


class ParallelConcat(Layer):
    """Run branches on the same input and concatenate their outputs."""

    def __init__(self, branches: list):
        self.branches = branches

    def _named(self):
        for bi, branch in enumerate(self.branches):
            for li, layer in enumerate(branch):
                yield f"b{bi}.l{li}", layer

    def params(self):
        return {f"{p}.{k}": v for p, layer in self._named() for k, v in layer.params().items()}

    def grads(self):
        return {f"{p}.{k}": v for p, layer in self._named() for k, v in layer.grads().items()}

    def buffers(self):
        return {f"{p}.{k}": v for p, layer in self._named() for k, v in layer.buffers().items()}

    def forward(self, x, train):
        outs = []
        for branch in self.branches:
            h = x
            for layer in branch:
                h = layer.forward(h, train)
            outs.append(h)
        self._widths = [o.shape[1] for o in outs]
        return np.concatenate(outs, axis=1)

    def backward(self, dout):
        dx = None
        offset = 0
        for branch, width in zip(self.branches, self._widths):
            d = dout[:, offset : offset + width]
            offset += width
            for layer in reversed(branch):
                d = layer.backward(d)
            dx = d if dx is None else dx + d
        return dx
