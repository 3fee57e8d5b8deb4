"""Architecture assembly, training, prediction, and the model container."""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass

import numpy as np

from ..dataset import NormalizationStats
from ..errors import ParseError, TrainingDivergedError, ValidationError
from .activations import ACTIVATION_NAMES, sigmoid, softmax
from .layers import (
    Activation,
    AttentionPool,
    BatchNorm,
    Conv1D,
    Dense,
    DimensionShuffle,
    Flatten,
    GlobalAveragePool,
    LSTMLayer,
    MaxPool1D,
    ParallelConcat,
)
from .optim import OPTIMIZER_NAMES, make_optimizer

ARCHITECTURES = ("mlp", "lstm", "malstm_fcn", "cnn")

# fixed sizes of the two-branch architecture; its grid leaves them untuned
MALSTM_UNITS = 64
MALSTM_FILTERS = (128, 256, 256)
MALSTM_KERNELS = (8, 5, 3)
CNN_KERNEL = 3

_MAGIC = b"CMNN"


@dataclass
class NetworkSpec:
    """One point in hyperparameter space plus the training seed."""

    architecture: str
    epochs: int
    hidden_layers: int
    batch_size: int
    optimizer: str
    activation: str
    neurons: int
    learning_rate: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        self.optimizer = self.optimizer.lower()
        self.activation = self.activation.lower()
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.architecture!r}, expected one of {ARCHITECTURES}")
        if self.optimizer not in OPTIMIZER_NAMES:
            raise ValueError(f"unknown optimizer {self.optimizer!r}, expected one of {OPTIMIZER_NAMES}")
        if self.activation not in ACTIVATION_NAMES:
            raise ValueError(f"unknown activation {self.activation!r}, expected one of {ACTIVATION_NAMES}")
        for name in ("epochs", "hidden_layers", "batch_size", "neurons"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


def _bce_with_logits(z: np.ndarray, y: np.ndarray):
    z1 = z[:, 0]
    yf = y.astype(np.float64)
    loss = float(np.mean(np.maximum(z1, 0.0) - z1 * yf + np.log1p(np.exp(-np.abs(z1)))))
    dz = ((sigmoid(z1) - yf) / len(yf))[:, None]
    return loss, dz


def _softmax_cross_entropy(z: np.ndarray, y: np.ndarray):
    m = z.max(axis=1, keepdims=True)
    lse = m[:, 0] + np.log(np.exp(z - m).sum(axis=1))
    idx = np.arange(len(y))
    loss = float(np.mean(lse - z[idx, y]))
    dz = softmax(z, axis=-1)
    dz[idx, y] -= 1.0
    return loss, dz / len(y)


class Network:
    """An ordered layer chain with a sigmoid or two-way softmax head.

    Rows arrive as flat lag-block vectors (newest block first); sequence
    architectures view them as (batch, steps, features) in time order, the
    flat architecture consumes them as-is.
    """

    def __init__(self, layers, head, input_dim, sequence_len, flatten_input, architecture):
        self.layers = layers
        self.head = head
        self.input_dim = input_dim
        self.sequence_len = sequence_len
        self.flatten_input = flatten_input
        self.architecture = architecture

    def prepare(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        width = self.input_dim * self.sequence_len
        if X.ndim != 2 or X.shape[1] != width:
            raise ValueError(f"expected (batch, {width}) inputs, got {X.shape}")
        if self.flatten_input:
            return X
        seq = X.reshape(len(X), self.sequence_len, self.input_dim)[:, ::-1, :]
        return np.ascontiguousarray(seq)

    def logits(self, X: np.ndarray, train: bool = False) -> np.ndarray:
        h = self.prepare(X)
        for layer in self.layers:
            h = layer.forward(h, train)
        return h

    def probabilities(self, X: np.ndarray) -> np.ndarray:
        z = self.logits(X, train=False)
        return sigmoid(z) if self.head == "sigmoid" else softmax(z, axis=-1)

    def loss(self, X, y, train: bool = True, backward: bool = True) -> float:
        z = self.logits(X, train=train)
        head_loss = _bce_with_logits if self.head == "sigmoid" else _softmax_cross_entropy
        value, dz = head_loss(z, np.asarray(y))
        if backward:
            d = dz
            for layer in reversed(self.layers):
                d = layer.backward(d)
        return value

    def _collect(self, what: str) -> dict:
        out = {}
        for i, layer in enumerate(self.layers):
            tag = f"{i:02d}.{type(layer).__name__.lower()}"
            for key, value in getattr(layer, what)().items():
                out[f"{tag}.{key}"] = value
        return out

    def params(self) -> dict:
        return self._collect("params")

    def grads(self) -> dict:
        return self._collect("grads")

    def buffers(self) -> dict:
        return self._collect("buffers")


def build_network(spec: NetworkSpec, input_dim: int, sequence_len: int = 1, zero_init: bool = False) -> Network:
    """Assemble the layer chain for spec's architecture.

    The two-branch architecture ignores spec.hidden_layers, spec.neurons and
    spec.activation: its layer sizes are fixed (64-unit attention recurrence
    against convolutions of 128/256/256 filters with kernels 8/5/3).
    zero_init zeroes every weight (batch-norm scales stay 1) so a fresh
    sigmoid or two-way softmax head outputs exactly 0.5.
    """
    if input_dim < 1 or sequence_len < 1:
        raise ValueError("input_dim and sequence_len must be at least 1")
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 0]))
    arch = spec.architecture
    layers: list = []

    if arch == "mlp":
        width = input_dim * sequence_len
        for _ in range(spec.hidden_layers):
            layers.append(Dense(width, spec.neurons, rng))
            layers.append(Activation(spec.activation))
            width = spec.neurons
        layers.append(Dense(width, 1, rng))
        net = Network(layers, "sigmoid", input_dim, sequence_len, True, arch)
    elif arch == "lstm":
        width = input_dim
        for i in range(spec.hidden_layers):
            last = i == spec.hidden_layers - 1
            layers.append(
                LSTMLayer(width, spec.neurons, rng, activation=spec.activation, return_sequences=not last)
            )
            width = spec.neurons
        layers.append(Dense(spec.neurons, 1, rng))
        net = Network(layers, "sigmoid", input_dim, sequence_len, False, arch)
    elif arch == "cnn":
        if spec.hidden_layers < 2:
            raise ValueError("cnn architecture requires at least 2 stacked conv layers")
        channels = input_dim
        for _ in range(spec.hidden_layers):
            layers.append(Conv1D(channels, spec.neurons, CNN_KERNEL, rng))
            layers.append(Activation(spec.activation))
            channels = spec.neurons
        layers.append(MaxPool1D())
        layers.append(Flatten())
        pooled = (sequence_len + 1) // 2
        layers.append(Dense(pooled * spec.neurons, 1, rng))
        net = Network(layers, "sigmoid", input_dim, sequence_len, False, arch)
    elif arch == "malstm_fcn":
        recurrent = [
            DimensionShuffle(),
            LSTMLayer(sequence_len, MALSTM_UNITS, rng, activation="tanh", return_sequences=True),
            AttentionPool(MALSTM_UNITS, rng),
        ]
        conv: list = []
        channels = input_dim
        for filters, kernel in zip(MALSTM_FILTERS, MALSTM_KERNELS):
            conv.append(Conv1D(channels, filters, kernel, rng, use_bias=False))
            conv.append(BatchNorm(filters))
            conv.append(Activation("relu"))
            channels = filters
        conv.append(GlobalAveragePool())
        layers.append(ParallelConcat([recurrent, conv]))
        layers.append(Dense(MALSTM_UNITS + MALSTM_FILTERS[-1], 2, rng))
        net = Network(layers, "softmax", input_dim, sequence_len, False, arch)
    else:  # pragma: no cover - guarded by NetworkSpec validation
        raise ValueError(f"unknown architecture {arch!r}")

    if zero_init:
        for name, value in net.params().items():
            if not name.endswith(".gamma"):
                value[...] = 0.0
    return net


def forward(network: Network, batch) -> np.ndarray:
    """Inference-mode probabilities: (n, 1) in (0, 1) for sigmoid heads,
    (n, 2) rows summing to 1 for the softmax head."""
    return network.probabilities(batch)


def train_step(network: Network, X, y, optimizer, epoch: int | None = None) -> float:
    """One forward/backward/update cycle; returns the batch loss."""
    loss = network.loss(X, y, train=True, backward=True)
    if not np.isfinite(loss):
        raise TrainingDivergedError(epoch)
    optimizer.step(network.grads())
    return loss


@dataclass
class TrainedModel:
    spec: NetworkSpec
    network: Network
    loss_trace: np.ndarray
    normalization: NormalizationStats | None = None

    @property
    def parameters(self) -> dict:
        return self.network.params()


def fit(
    spec: NetworkSpec,
    X,
    y,
    sequence_len: int = 1,
    normalization: NormalizationStats | None = None,
    zero_init: bool = False,
) -> TrainedModel:
    """Train a fresh network on (X, y) per the spec's schedule.

    Batches are drawn from a seeded shuffle each epoch; the loss trace holds
    the sample-weighted mean batch loss per epoch. Identical spec and data
    give bit-identical parameters and traces.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be 2-D with one label per row")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be binary")
    if X.shape[1] % sequence_len:
        raise ValueError("feature width is not a multiple of sequence_len")
    network = build_network(spec, X.shape[1] // sequence_len, sequence_len, zero_init)
    optimizer = make_optimizer(spec.optimizer, network.params(), spec.learning_rate)
    shuffle_rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 1]))
    n = len(X)
    trace = np.empty(spec.epochs)
    for epoch in range(spec.epochs):
        order = shuffle_rng.permutation(n)
        total = 0.0
        for start in range(0, n, spec.batch_size):
            idx = order[start : start + spec.batch_size]
            total += train_step(network, X[idx], y[idx], optimizer, epoch) * len(idx)
        trace[epoch] = total / n
    return TrainedModel(spec, network, trace, normalization)


def predict(model: TrainedModel, X):
    """(labels, class-1 probabilities); probability 0.5 maps to label 1."""
    probs = model.network.probabilities(X)
    p1 = probs[:, 0] if model.network.head == "sigmoid" else probs[:, 1]
    return (p1 >= 0.5).astype(np.int64), p1


def gradient_check(network: Network, X, y, epsilon: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    Evaluates the training-mode loss, so batch statistics are part of the
    function being differentiated; running buffers are restored afterwards.
    """
    y = np.asarray(y)
    snapshot = {k: v.copy() for k, v in network.buffers().items()}
    network.loss(X, y, train=True, backward=True)
    analytic = {k: v.copy() for k, v in network.grads().items()}
    worst = 0.0
    for name, arr in network.params().items():
        flat = arr.ravel()
        aflat = analytic[name].ravel()
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + epsilon
            up = network.loss(X, y, train=True, backward=False)
            flat[j] = orig - epsilon
            down = network.loss(X, y, train=True, backward=False)
            flat[j] = orig
            numeric = (up - down) / (2.0 * epsilon)
            err = abs(aflat[j] - numeric) / max(abs(aflat[j]), abs(numeric), 1e-12)
            worst = max(worst, err)
    for key, value in network.buffers().items():
        value[...] = snapshot[key]
    return worst


def param_count(network: Network) -> int:
    return sum(p.size for p in network.params().values())


def save_model(model: TrainedModel, path) -> None:
    """Self-describing container: json header, then little-endian 64-bit
    tensors in the header's order."""
    params = model.network.params()
    buffers = model.network.buffers()
    tensors = [{"name": k, "shape": list(params[k].shape), "kind": "param"} for k in sorted(params)]
    tensors += [{"name": k, "shape": list(buffers[k].shape), "kind": "buffer"} for k in sorted(buffers)]
    norm = None
    if model.normalization is not None:
        norm = {
            "mean": [float(v) for v in model.normalization.mean],
            "std": [float(v) for v in model.normalization.std],
            "constant": [bool(v) for v in model.normalization.constant],
        }
    header = {
        "format": "cmnn",
        "version": 1,
        "spec": asdict(model.spec),
        "input_dim": model.network.input_dim,
        "sequence_len": model.network.sequence_len,
        "loss_trace": [float(v) for v in model.loss_trace],
        "normalization": norm,
        "tensors": tensors,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        source = {"param": params, "buffer": buffers}
        for entry in tensors:
            fh.write(source[entry["kind"]][entry["name"]].astype("<f8").tobytes(order="C"))


def load_model(path) -> TrainedModel:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != _MAGIC:
        raise ParseError(f"{path}: not a model container")
    (header_len,) = struct.unpack("<Q", raw[4:12])
    try:
        header = json.loads(raw[12 : 12 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: corrupt header: {exc}") from exc
    try:
        spec = NetworkSpec(**header["spec"])
        network = build_network(spec, header["input_dim"], header["sequence_len"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: stored spec is invalid: {exc}") from exc
    params = network.params()
    buffers = network.buffers()
    source = {"param": params, "buffer": buffers}
    expected = [{"name": k, "shape": list(params[k].shape), "kind": "param"} for k in sorted(params)]
    expected += [{"name": k, "shape": list(buffers[k].shape), "kind": "buffer"} for k in sorted(buffers)]
    if header["tensors"] != expected:
        raise ValidationError(f"{path}: stored tensors do not match the spec's architecture")
    offset = 12 + header_len
    for entry in header["tensors"]:
        target = source[entry["kind"]][entry["name"]]
        end = offset + target.size * 8
        if end > len(raw):
            raise ParseError(f"{path}: container truncated")
        target[...] = np.frombuffer(raw[offset:end], dtype="<f8").reshape(target.shape)
        offset = end
    if offset != len(raw):
        raise ParseError(f"{path}: trailing bytes after tensor data")
    norm = None
    if header["normalization"] is not None:
        norm = NormalizationStats(
            np.array(header["normalization"]["mean"]),
            np.array(header["normalization"]["std"]),
            np.array(header["normalization"]["constant"], dtype=bool),
        )
    return TrainedModel(spec, network, np.array(header["loss_trace"]), norm)
