"""From-scratch differentiable networks: four architectures on plain numpy.

Everything runs in 64-bit precision so finite-difference gradient checks are
meaningful; there is no GPU path and no external framework.
"""

from .activations import ACTIVATION_NAMES, activation, sigmoid, softmax
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
    attention_context,
    dimension_shuffle,
    lstm_step,
)
from .network import (
    ARCHITECTURES,
    Network,
    NetworkSpec,
    TrainedModel,
    build_network,
    fit,
    forward,
    gradient_check,
    load_model,
    param_count,
    predict,
    save_model,
    train_step,
)
from .optim import OPTIMIZER_NAMES, make_optimizer

__all__ = [
    "ACTIVATION_NAMES",
    "ARCHITECTURES",
    "Activation",
    "AttentionPool",
    "BatchNorm",
    "Conv1D",
    "Dense",
    "DimensionShuffle",
    "Flatten",
    "GlobalAveragePool",
    "LSTMLayer",
    "MaxPool1D",
    "Network",
    "ParallelConcat",
    "NetworkSpec",
    "OPTIMIZER_NAMES",
    "TrainedModel",
    "activation",
    "attention_context",
    "build_network",
    "dimension_shuffle",
    "fit",
    "forward",
    "gradient_check",
    "load_model",
    "lstm_step",
    "make_optimizer",
    "param_count",
    "predict",
    "save_model",
    "sigmoid",
    "softmax",
    "train_step",
]
