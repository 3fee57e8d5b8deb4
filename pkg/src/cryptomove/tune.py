"""Exhaustive grid search with bootstrap out-of-bag validation.

Every (config, iteration) pair seeds its own generator, so results are
independent of worker count and execution order.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dataset import LabeledDataset
from .errors import SearchError, TrainingDivergedError
from .metrics import classification_report, confusion
from .nn import NetworkSpec, build_network, fit, predict

EPOCH_CHOICES = (100, 250, 500, 1000)
HIDDEN_LAYER_CHOICES = (1, 2, 3, 4, 5)
BATCH_CHOICES = (32, 64, 128, 256, 512)
OPTIMIZER_CHOICES = ("adam", "nadam", "adamax", "rmsprop", "sgd")
NEURON_CHOICES = (16, 32, 64, 128, 256)
_ACTIVATIONS = {"mlp": ("relu", "tanh", "softmax"), "cnn": ("relu", "tanh", "softmax"), "lstm": ("relu", "tanh")}

# the two-branch architecture leaves these untuned; grid specs carry
# placeholders that build_network ignores for it
_FIXED_HIDDEN, _FIXED_ACTIVATION, _FIXED_NEURONS = 1, "tanh", 16

#: fraction for the literal fixed-holdout reading of the validation scheme
LITERAL_OOB_FRACTION = 0.378

RESULT_COLUMNS = (
    "architecture",
    "epochs",
    "hidden_layers",
    "batch_size",
    "optimizer",
    "activation",
    "neurons",
    "acc_mean",
    "acc_std",
    "prec_mean",
    "prec_std",
    "rec_mean",
    "rec_std",
    "f1_mean",
    "f1_std",
    "iterations",
    "failures",
)

_METRIC_FIELDS = {"accuracy": "acc", "precision": "prec", "recall": "rec", "f1": "f1"}


@dataclass(frozen=True)
class SearchSpace:
    """Candidate value lists per tunable parameter for one architecture.

    hidden_layers, activation and neurons are None for malstm_fcn, whose
    layer sizes are fixed; every other architecture requires all six lists.
    """

    architecture: str
    epochs: tuple
    batch_size: tuple
    optimizer: tuple
    hidden_layers: tuple | None = None
    activation: tuple | None = None
    neurons: tuple | None = None

    def __post_init__(self):
        tuned = self.architecture != "malstm_fcn"
        for name in ("epochs", "batch_size", "optimizer", "hidden_layers", "activation", "neurons"):
            values = getattr(self, name)
            if name in ("epochs", "batch_size", "optimizer") or tuned:
                if not values:
                    raise ValueError(f"{name} candidate list must be non-empty")
            elif values is not None:
                raise ValueError(f"{name} is fixed for {self.architecture} and must be None")

    @classmethod
    def table8(cls, architecture: str) -> "SearchSpace":
        """The published searching intervals for the four architectures."""
        if architecture == "malstm_fcn":
            return cls(architecture, EPOCH_CHOICES, BATCH_CHOICES, OPTIMIZER_CHOICES)
        if architecture not in _ACTIVATIONS:
            raise ValueError(f"no search space defined for architecture {architecture!r}")
        return cls(
            architecture,
            EPOCH_CHOICES,
            BATCH_CHOICES,
            OPTIMIZER_CHOICES,
            hidden_layers=HIDDEN_LAYER_CHOICES,
            activation=_ACTIVATIONS[architecture],
            neurons=NEURON_CHOICES,
        )


def grid(space: SearchSpace) -> list[NetworkSpec]:
    """The Cartesian product as specs, ordered lexicographically by
    (epochs, hidden_layers, batch_size, optimizer, activation, neurons)
    with the rightmost parameter varying fastest."""
    if space.architecture == "malstm_fcn":
        return [
            NetworkSpec(
                architecture=space.architecture,
                epochs=e,
                hidden_layers=_FIXED_HIDDEN,
                batch_size=b,
                optimizer=o,
                activation=_FIXED_ACTIVATION,
                neurons=_FIXED_NEURONS,
            )
            for e, b, o in itertools.product(space.epochs, space.batch_size, space.optimizer)
        ]
    return [
        NetworkSpec(
            architecture=space.architecture,
            epochs=e,
            hidden_layers=h,
            batch_size=b,
            optimizer=o,
            activation=a,
            neurons=u,
        )
        for e, h, b, o, a, u in itertools.product(
            space.epochs, space.hidden_layers, space.batch_size, space.optimizer, space.activation, space.neurons
        )
    ]


def bootstrap_split(n: int, rng: np.random.Generator):
    """n uniform draws with replacement, plus the never-drawn indices."""
    if n < 1:
        raise ValueError("n must be at least 1")
    in_bag = rng.integers(0, n, size=n)
    drawn = np.zeros(n, dtype=bool)
    drawn[in_bag] = True
    return in_bag, np.flatnonzero(~drawn)


def _holdout_split(n: int, fraction: float, rng: np.random.Generator):
    if n < 2:
        raise ValueError("fixed-fraction holdout needs at least 2 samples")
    k = min(max(1, round(n * fraction)), n - 1)
    perm = rng.permutation(n)
    return perm[k:], perm[:k]


@dataclass(frozen=True)
class MetricDistribution:
    """Out-of-bag score distribution for one configuration."""

    acc_mean: float
    acc_std: float
    prec_mean: float
    prec_std: float
    rec_mean: float
    rec_std: float
    f1_mean: float
    f1_std: float
    iterations: int
    failures: int
    seed: int

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        for name in ("acc_std", "prec_std", "rec_std", "f1_std"):
            value = getattr(self, name)
            if not math.isnan(value) and value < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def failed(self) -> bool:
        return self.failures * 10 > self.iterations


def _failed_distribution(iterations: int, failures: int, base_seed: int) -> MetricDistribution:
    nan = float("nan")
    return MetricDistribution(nan, nan, nan, nan, nan, nan, nan, nan, iterations, failures, base_seed)


def evaluate_config(
    spec: NetworkSpec,
    ds: LabeledDataset,
    iterations: int = 200,
    base_seed: int = 0,
    spec_index: int = 0,
    oob_fraction: float | None = None,
) -> MetricDistribution:
    """Score one configuration over seeded resampling iterations.

    Iteration i draws its split and model seed from a generator seeded by
    (base_seed, spec_index, i). Training divergence marks the iteration
    failed; more than 10% failures fails the whole configuration and its
    metrics become NaN. Macro-averaged precision/recall/f1 accompany
    accuracy, each summarized by mean and population standard deviation.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    n = len(ds.y)
    try:
        build_network(spec, ds.base_width, ds.lag)
    except ValueError:
        return _failed_distribution(iterations, iterations, base_seed)
    scores = {key: [] for key in ("acc", "prec", "rec", "f1")}
    failures = 0
    for i in range(iterations):
        rng = np.random.default_rng(np.random.SeedSequence([base_seed, spec_index, i]))
        if oob_fraction is None:
            in_bag, oob = bootstrap_split(n, rng)
            while len(oob) == 0:
                in_bag, oob = bootstrap_split(n, rng)
        else:
            in_bag, oob = _holdout_split(n, oob_fraction, rng)
        it_spec = replace(spec, seed=int(rng.integers(0, 2**31)))
        try:
            model = fit(it_spec, ds.X[in_bag], ds.y[in_bag], sequence_len=ds.lag)
        except TrainingDivergedError:
            failures += 1
            continue
        labels, _ = predict(model, ds.X[oob])
        report = classification_report(confusion(ds.y[oob], labels))
        scores["acc"].append(report.accuracy)
        scores["prec"].append(report.macro.precision)
        scores["rec"].append(report.macro.recall)
        scores["f1"].append(report.macro.f1)
    if failures * 10 > iterations or not scores["acc"]:
        return _failed_distribution(iterations, failures, base_seed)
    stats = {}
    for key, values in scores.items():
        arr = np.asarray(values)
        stats[f"{key}_mean"] = float(arr.mean())
        stats[f"{key}_std"] = float(arr.std())
    return MetricDistribution(iterations=iterations, failures=failures, seed=base_seed, **stats)


@dataclass(frozen=True)
class ConfigResult:
    index: int
    spec: NetworkSpec
    distribution: MetricDistribution


_WORKER_DS: LabeledDataset | None = None


def _init_worker(ds: LabeledDataset) -> None:
    global _WORKER_DS
    _WORKER_DS = ds


def _eval_task(args) -> MetricDistribution:
    spec, iterations, base_seed, index, oob_fraction = args
    return evaluate_config(spec, _WORKER_DS, iterations, base_seed, index, oob_fraction)


def grid_search(
    space: SearchSpace,
    ds: LabeledDataset,
    iterations: int = 200,
    base_seed: int = 0,
    objective: str = "accuracy",
    workers: int = 1,
    oob_fraction: float | None = None,
):
    """Evaluate the full grid and pick the best configuration.

    Best = highest objective mean; ties break on lower objective standard
    deviation, then earlier grid order. Returns (best spec, all results).
    """
    if objective not in _METRIC_FIELDS:
        raise ValueError(f"objective must be one of {tuple(_METRIC_FIELDS)}")
    specs = grid(space)
    if workers > 1:
        tasks = [(spec, iterations, base_seed, i, oob_fraction) for i, spec in enumerate(specs)]
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(ds,)) as pool:
            distributions = list(pool.map(_eval_task, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
    else:
        distributions = [
            evaluate_config(spec, ds, iterations, base_seed, i, oob_fraction) for i, spec in enumerate(specs)
        ]
    results = [ConfigResult(i, spec, dist) for i, (spec, dist) in enumerate(zip(specs, distributions))]
    field = _METRIC_FIELDS[objective]
    live = [r for r in results if not r.distribution.failed]
    if not live:
        raise SearchError("every configuration in the grid failed")
    best = min(live, key=lambda r: (-getattr(r.distribution, f"{field}_mean"), getattr(r.distribution, f"{field}_std"), r.index))
    return best.spec, results


def _result_cells(result: ConfigResult):
    spec, dist = result.spec, result.distribution
    untuned = spec.architecture == "malstm_fcn"
    cells = [
        spec.architecture,
        str(spec.epochs),
        "-" if untuned else str(spec.hidden_layers),
        str(spec.batch_size),
        spec.optimizer,
        "-" if untuned else spec.activation,
        "-" if untuned else str(spec.neurons),
    ]
    for name in RESULT_COLUMNS[7:15]:
        value = getattr(dist, name)
        cells.append("nan" if math.isnan(value) else f"{value:.6f}")
    cells.append(str(dist.iterations))
    cells.append(str(dist.failures))
    return cells


def write_results_csv(results, path) -> None:
    lines = [",".join(RESULT_COLUMNS)]
    lines.extend(",".join(_result_cells(r)) for r in results)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
