"""Movement labeling, lagged regressor assembly, splitting, and scaling."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ParseError, ValidationError
from .ingest import CandleSeries
from .indicators import IndicatorFrame

FEATURE_SETS = ("restricted", "technical_social", "unrestricted")

CANDLE_COLUMNS = ("open", "high", "low", "close", "volume")


def label_movements(candles: CandleSeries, flip_sign: bool = False) -> np.ndarray:
    """Binary up/down labels for the first n-1 bars.

    Bar t is labeled 1 (up) when open[t+1] - close[t] > 0 and 0 otherwise,
    so a flat open is a down move. The source prose describes the difference
    with the opposite operand order while still calling the positive case
    "up"; flip_sign selects that literal reading (up when close[t] exceeds
    the next open) for anyone who wants to reproduce it.
    """
    if len(candles) < 2:
        raise ValueError("labeling needs at least 2 bars")
    delta = candles.open[1:] - candles.close[:-1]
    if flip_sign:
        delta = -delta
    return (delta > 0).astype(np.int64)


@dataclass
class NormalizationStats:
    """Per-feature z-score parameters fitted on training rows."""

    mean: np.ndarray
    std: np.ndarray
    constant: np.ndarray  # std == 0 features, passed through unscaled

    def transform(self, X: np.ndarray) -> np.ndarray:
        out = X - self.mean
        scale = np.where(self.constant, 1.0, self.std)
        out /= scale
        out[:, self.constant] = X[:, self.constant]
        return out


@dataclass
class LabeledDataset:
    """Feature matrix with aligned binary movement labels.

    X rows hold lag blocks newest first: columns [0, d) are the features at
    time t, the next d are time t-1, and so on. sequence_view() rearranges
    them oldest first for recurrent models.
    """

    feature_names: list[str]
    X: np.ndarray
    y: np.ndarray
    feature_set: str
    frequency: str
    lag: int
    normalization: NormalizationStats | None = None

    def __post_init__(self):
        if self.X.ndim != 2 or len(self.X) != len(self.y):
            raise ValueError("X and y row counts must match")
        if len(self.feature_names) != self.X.shape[1]:
            raise ValueError("feature_names must match X columns")

    def __len__(self) -> int:
        return len(self.y)

    @property
    def base_width(self) -> int:
        return self.X.shape[1] // self.lag

    def sequence_view(self) -> np.ndarray:
        """(rows, lag, base features) array in time-ascending step order."""
        n, d = self.X.shape
        base = self.base_width
        seq = self.X.reshape(n, self.lag, base)
        return seq[:, ::-1, :]


def _affect_feature_block(affect, candles) -> tuple[list[str], np.ndarray]:
    names: list[str] = []
    blocks: list[np.ndarray] = []
    for series in affect:
        if series.frequency != candles.frequency:
            raise ValidationError(
                f"affect series frequency {series.frequency!r} differs from candles {candles.frequency!r}"
            )
        index = {int(t): i for i, t in enumerate(series.timestamps)}
        try:
            rows = np.array([index[int(t)] for t in candles.timestamps], dtype=np.intp)
        except KeyError as exc:
            raise ValidationError(f"affect axis missing candle timestamp {exc.args[0]}") from exc
        names.extend(series.names)
        matrix = series.matrix()
        blocks.append(matrix[rows] if matrix.shape[1] else matrix[rows].reshape(len(candles), 0))
    if not blocks:
        return [], np.zeros((len(candles), 0))
    return names, np.hstack(blocks)


def build_dataset(
    candles: CandleSeries,
    frame: IndicatorFrame | None = None,
    affect=(),
    feature_set: str = "restricted",
    lag: int = 1,
    flip_sign: bool = False,
) -> LabeledDataset:
    """Assemble the lagged feature matrix and movement labels.

    Row t stacks the selected base columns at times t, t-1, ..., t-lag+1 and
    is kept only when every lagged value is defined; its label comes from the
    t -> t+1 movement, so the final bar never yields a row. Nothing in row t
    reads any value after time t.
    """
    if not isinstance(lag, int) or isinstance(lag, bool) or lag < 1:
        raise ValueError("lag must be a positive integer")
    if feature_set not in FEATURE_SETS:
        raise ValueError(f"unknown feature_set {feature_set!r}, expected one of {FEATURE_SETS}")
    n = len(candles)
    labels = label_movements(candles, flip_sign)

    base_names = list(CANDLE_COLUMNS)
    base_cols = [getattr(candles, c) for c in CANDLE_COLUMNS]
    warmup = 0

    if feature_set == "unrestricted":
        if frame is None or not frame.names:
            raise ValueError("unrestricted feature set needs a non-empty indicator frame")
        if len(frame) != n or (frame.timestamps != candles.timestamps).any():
            raise ValidationError("indicator frame axis differs from the candle axis")
        base_names.extend(frame.names)
        base_cols.extend(frame.columns[name] for name in frame.names)
        warmup = max(frame.warmups[name] for name in frame.names)

    if feature_set in ("technical_social", "unrestricted"):
        affect_names, affect_block = _affect_feature_block(affect, candles)
        if feature_set == "technical_social" and not affect_names:
            raise ValueError("technical_social feature set selects no affect columns")
        base_names.extend(affect_names)
        base_cols.extend(affect_block.T)

    if len(set(base_names)) != len(base_names):
        raise ValueError("duplicate feature names across inputs")

    base = np.column_stack(base_cols)
    first = warmup + lag - 1  # earliest t whose whole lag window is defined
    rows = np.arange(first, n - 1)
    if len(rows) == 0:
        raise ValueError("no labeled rows remain after warm-up and lagging")

    d = base.shape[1]
    X = np.empty((len(rows), d * lag))
    names: list[str] = []
    for k in range(lag):
        X[:, k * d : (k + 1) * d] = base[rows - k]
        names.extend(name if k == 0 else f"{name}_lag{k}" for name in base_names)
    if not np.isfinite(X).all():
        raise ValidationError("undefined feature values survived warm-up dropping")
    return LabeledDataset(names, X, labels[rows], feature_set, candles.frequency, lag)


def split(ds: LabeledDataset, fractions=(0.7, 0.15, 0.15)):
    """Chronological train/validation/test split.

    Counts are floor(n * fraction) with every remainder row assigned to the
    training partition, keeping the newest rows in test.
    """
    if len(fractions) != 3 or any(f <= 0 for f in fractions):
        raise ValueError("fractions must be three positive numbers")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("fractions must sum to 1")
    n = len(ds)
    n_val = int(n * fractions[1])
    n_test = int(n * fractions[2])
    n_train = n - n_val - n_test
    if min(n_train, n_val, n_test) == 0:
        raise ValueError(f"split of {n} rows leaves an empty partition")
    bounds = (0, n_train, n_train + n_val, n)
    parts = []
    for lo, hi in zip(bounds, bounds[1:]):
        parts.append(
            replace(ds, X=ds.X[lo:hi].copy(), y=ds.y[lo:hi].copy())
        )
    return tuple(parts)


def normalize(train: LabeledDataset, others=()):
    """Z-score features using training-set statistics only.

    Uses the population standard deviation. Constant training columns are
    flagged and passed through unscaled everywhere.
    """
    if len(train) == 0:
        raise ValueError("cannot fit normalization on an empty training set")
    mean = train.X.mean(axis=0)
    std = train.X.std(axis=0)
    stats = NormalizationStats(mean, std, std == 0.0)
    scaled_train = replace(train, X=stats.transform(train.X), normalization=stats)
    scaled_others = [replace(ds, X=stats.transform(ds.X), normalization=stats) for ds in others]
    return scaled_train, scaled_others, stats


@dataclass
class ClassDistribution:
    """Counts and percentages of down (0) and up (1) labels."""

    n: int
    counts: dict
    percentages: dict  # rounded to one decimal place
    raw_percentages: dict  # full precision, for tolerance comparisons


def class_distribution(y) -> ClassDistribution:
    y = np.asarray(y)
    if len(y) == 0:
        raise ValueError("class distribution of an empty label set")
    n = len(y)
    counts = {cls: int((y == cls).sum()) for cls in (0, 1)}
    raw = {cls: counts[cls] / n * 100.0 for cls in (0, 1)}
    rounded = {cls: round(raw[cls], 1) for cls in (0, 1)}
    return ClassDistribution(n, counts, rounded, raw)


def write_dataset(ds: LabeledDataset, path, meta_path=None) -> None:
    """CSV of features plus label column, with a key-value sidecar."""
    meta_path = f"{path}.meta" if meta_path is None else meta_path
    lines = [",".join(ds.feature_names) + ",label"]
    for i in range(len(ds)):
        cells = [repr(float(v)) for v in ds.X[i]]
        cells.append(str(int(ds.y[i])))
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")

    meta = [
        f"feature_set={ds.feature_set}",
        f"frequency={ds.frequency}",
        f"lag={ds.lag}",
        f"rows={len(ds)}",
        f"features={ds.X.shape[1]}",
        f"normalized={'true' if ds.normalization is not None else 'false'}",
    ]
    if ds.normalization is not None:
        stats = ds.normalization
        for j, name in enumerate(ds.feature_names):
            meta.append(f"norm.{name}.mean={float(stats.mean[j])!r}")
            meta.append(f"norm.{name}.std={float(stats.std[j])!r}")
            meta.append(f"norm.{name}.constant={int(stats.constant[j])}")
    with open(meta_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(meta) + "\n")


def read_dataset(path, meta_path=None) -> LabeledDataset:
    meta_path = f"{path}.meta" if meta_path is None else meta_path
    kv = {}
    with open(meta_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{meta_path}: line {lineno}: expected key=value")
            key, value = line.split("=", 1)
            kv[key] = value
    for required in ("feature_set", "frequency", "lag", "rows", "features", "normalized"):
        if required not in kv:
            raise ParseError(f"{meta_path}: missing {required}")

    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header[-1] != "label":
            raise ParseError(f"{path}: last column must be label")
        names = header[:-1]
        X_rows, y_rows = [], []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != len(header):
                raise ParseError(f"{path}: line {lineno}: expected {len(header)} cells")
            try:
                X_rows.append([float(c) for c in cells[:-1]])
                y_rows.append(int(cells[-1]))
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from exc

    X = np.array(X_rows, dtype=np.float64).reshape(len(y_rows), len(names))
    y = np.array(y_rows, dtype=np.int64)
    if len(X) != int(kv["rows"]) or X.shape[1] != int(kv["features"]):
        raise ValidationError(f"{path}: shape differs from sidecar metadata")
    normalization = None
    if kv["normalized"] == "true":
        try:
            mean = np.array([float(kv[f"norm.{n}.mean"]) for n in names])
            std = np.array([float(kv[f"norm.{n}.std"]) for n in names])
            constant = np.array([kv[f"norm.{n}.constant"] == "1" for n in names])
        except KeyError as exc:
            raise ParseError(f"{meta_path}: missing normalization entry {exc.args[0]}") from exc
        normalization = NormalizationStats(mean, std, constant)
    return LabeledDataset(
        names, X, y, kv["feature_set"], kv["frequency"], int(kv["lag"]), normalization
    )
