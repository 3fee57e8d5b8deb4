"""Configuration-driven experiment orchestration.

A YAML config describes one experiment: where the input files live, which
feature set and label horizon to use, and which model configurations to
search. The pipeline runs as an ordered list of stages, each reading the
artifacts of the stages before it and writing its own into the output
directory, so any stage can be re-run in isolation for debugging. Artifact
files are written atomically and a failing stage removes whatever it had
already produced.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from contextlib import contextmanager
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import yaml

from . import figures
from .affect import aggregate_affect, read_affect_series, score_vad, write_affect_series
from .dataset import (
    FEATURE_SETS,
    build_dataset,
    class_distribution,
    label_movements,
    normalize,
    read_dataset,
    split,
    write_dataset,
)
from .errors import ConfigError, DataError, OutputError, PipelineError, UnsupportedIndicatorError
from .indicators import (
    CATALOGUE,
    IndicatorSpec,
    default_specs,
    indicator_frame,
    read_indicator_frame,
    write_indicator_frame,
)
from .ingest import (
    FREQUENCY_STEPS,
    AffectRecordSet,
    _read_rows,
    read_affect_records,
    read_candles,
    read_vad_lexicon,
    resample,
    write_candles,
)
from .metrics import classification_report, confusion, emit_report, rows_from_report
from .nn import NetworkSpec, fit, load_model, predict, save_model
from .tune import MetricDistribution, SearchSpace, grid, grid_search, write_results_csv

log = logging.getLogger(__name__)

STAGES = ("ingest", "features", "label", "dataset", "tune", "train", "evaluate", "report")

OBJECTIVES = ("accuracy", "precision", "recall", "f1")

COMMENT_HEADER = ("timestamp", "source", "channel", "text")

# Independent seed streams hung off the config's base seed. Model search and
# final training draw from different streams so adding a model to the config
# never perturbs the seeds of the models before it.
_TUNE_STREAM = 2
_TRAIN_STREAM = 3

_CONFIG_KEYS = frozenset(
    (
        "asset",
        "frequency",
        "candles",
        "candle_format",
        "affect",
        "lexicon",
        "feature_set",
        "lag",
        "indicators",
        "split",
        "iterations",
        "objective",
        "oob_fraction",
        "seed",
        "models",
        "out",
        "workers",
    )
)

_MODEL_KEYS = frozenset(
    ("architecture", "search", "epochs", "batch_size", "optimizer", "hidden_layers", "activation", "neurons")
)
_AXIS_KEYS = ("epochs", "hidden_layers", "batch_size", "optimizer", "activation", "neurons")


def _stream_seed(base: int, stream: int, index: int) -> int:
    rng = np.random.default_rng(np.random.SeedSequence([base, stream, index]))
    return int(rng.integers(0, 2**31))


@dataclass(frozen=True)
class AffectInput:
    """One per-comment affect CSV, optionally paired with its raw comments.

    When a comments file and a lexicon are both configured, the valence,
    arousal and dominance columns of the records are recomputed from the
    comment text; otherwise the values in the records file are used as-is.
    """

    records: str
    comments: str | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated description of one experiment run."""

    asset: str
    frequency: str
    candles: str
    feature_set: str
    seed: int
    models: tuple
    candle_format: str = "canonical_csv"
    affect: tuple = ()
    lexicon: str | None = None
    lag: int = 1
    indicators: tuple | None = None
    split: tuple = (0.7, 0.15, 0.15)
    iterations: int = 200
    objective: str = "accuracy"
    oob_fraction: float | None = None
    out: str = "outputs"
    workers: int = 1

    def __post_init__(self):
        if not self.asset or not isinstance(self.asset, str):
            raise ConfigError("asset must be a non-empty string")
        if self.frequency not in FREQUENCY_STEPS:
            raise ConfigError(f"frequency must be one of {tuple(FREQUENCY_STEPS)}, got {self.frequency!r}")
        if self.candle_format not in ("canonical_csv", "exchange_csv"):
            raise ConfigError(f"unknown candle_format {self.candle_format!r}")
        if self.feature_set not in FEATURE_SETS:
            raise ConfigError(f"unknown feature_set {self.feature_set!r}, expected one of {FEATURE_SETS}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if not isinstance(self.lag, int) or isinstance(self.lag, bool) or self.lag < 1:
            raise ConfigError("lag must be a positive integer")
        if not isinstance(self.iterations, int) or isinstance(self.iterations, bool) or self.iterations < 1:
            raise ConfigError("iterations must be a positive integer")
        if not isinstance(self.workers, int) or isinstance(self.workers, bool) or self.workers < 1:
            raise ConfigError("workers must be a positive integer")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        if self.oob_fraction is not None and not 0.0 < self.oob_fraction < 1.0:
            raise ConfigError("oob_fraction must lie strictly between 0 and 1")
        if len(self.split) != 3 or any(f <= 0 for f in self.split) or abs(sum(self.split) - 1.0) > 1e-9:
            raise ConfigError("split must be three positive fractions summing to 1")
        if not self.out or not isinstance(self.out, str):
            raise ConfigError("out must be a non-empty path")
        if not self.models:
            raise ConfigError("models must list at least one configuration")
        for mi, space in enumerate(self.models):
            if not isinstance(space, SearchSpace):
                raise ConfigError(f"models[{mi}] is not a search space")
            try:
                grid(space)
            except ValueError as exc:
                raise ConfigError(f"models[{mi}]: {exc}") from exc

        if not Path(self.candles).is_file():
            raise ConfigError(f"candle file not found: {self.candles}")
        if self.lexicon is not None and not Path(self.lexicon).is_file():
            raise ConfigError(f"lexicon file not found: {self.lexicon}")
        for entry in self.affect:
            if not Path(entry.records).is_file():
                raise ConfigError(f"affect records file not found: {entry.records}")
            if entry.comments is not None:
                if not Path(entry.comments).is_file():
                    raise ConfigError(f"comments file not found: {entry.comments}")
                if self.lexicon is None:
                    raise ConfigError("comments files need a lexicon to score them against")
        if self.feature_set == "technical_social" and not self.affect:
            raise ConfigError("technical_social feature set needs at least one affect input")

        if self.indicators is not None:
            if not self.indicators:
                raise ConfigError("indicators list must be non-empty when given")
            for spec in self.indicators:
                if spec.name not in CATALOGUE:
                    raise UnsupportedIndicatorError(spec.name, CATALOGUE)

    def digest(self) -> str:
        """Hash of everything that can influence results.

        The output directory and worker count are excluded on purpose: the
        same experiment written to two places, or run at two parallelism
        levels, is still the same experiment.
        """
        payload = {
            "asset": self.asset,
            "frequency": self.frequency,
            "candles": self.candles,
            "candle_format": self.candle_format,
            "affect": [{"records": e.records, "comments": e.comments} for e in self.affect],
            "lexicon": self.lexicon,
            "feature_set": self.feature_set,
            "lag": self.lag,
            "indicators": None
            if self.indicators is None
            else [
                {"name": s.name, "window": s.window, "lag": s.lag, "params": s.params}
                for s in self.indicators
            ],
            "split": list(self.split),
            "iterations": self.iterations,
            "objective": self.objective,
            "oob_fraction": self.oob_fraction,
            "seed": self.seed,
            "models": [_space_payload(space) for space in self.models],
        }
        blob = json.dumps(payload, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


def _space_payload(space: SearchSpace) -> dict:
    return {
        "architecture": space.architecture,
        "epochs": list(space.epochs),
        "batch_size": list(space.batch_size),
        "optimizer": list(space.optimizer),
        "hidden_layers": None if space.hidden_layers is None else list(space.hidden_layers),
        "activation": None if space.activation is None else list(space.activation),
        "neurons": None if space.neurons is None else list(space.neurons),
    }


def _as_axis(value, key: str, index: int) -> tuple:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"models[{index}]: search axis {key!r} must be a non-empty list")
    return tuple(value)


def _parse_model(entry, index: int) -> SearchSpace:
    if not isinstance(entry, dict):
        raise ConfigError(f"models[{index}] must be a mapping")
    unknown = set(entry) - _MODEL_KEYS
    if unknown:
        raise ConfigError(f"models[{index}]: unknown keys {sorted(unknown)}")
    arch = entry.get("architecture")
    if arch is None:
        raise ConfigError(f"models[{index}]: architecture is required")

    search = entry.get("search")
    fixed = {k: entry[k] for k in _AXIS_KEYS if k in entry}
    if search is not None and fixed:
        raise ConfigError(f"models[{index}]: give either a search block or fixed values, not both")

    try:
        if search == "published":
            return SearchSpace.table8(arch)
        if search is not None:
            if not isinstance(search, dict):
                raise ConfigError(f"models[{index}]: search must be a mapping or 'published'")
            bad = set(search) - set(_AXIS_KEYS)
            if bad:
                raise ConfigError(f"models[{index}]: unknown search axes {sorted(bad)}")
            axes = {k: _as_axis(v, k, index) for k, v in search.items()}
            return SearchSpace(
                architecture=arch,
                epochs=axes.get("epochs", ()),
                batch_size=axes.get("batch_size", ()),
                optimizer=axes.get("optimizer", ()),
                hidden_layers=axes.get("hidden_layers"),
                activation=axes.get("activation"),
                neurons=axes.get("neurons"),
            )
        missing = [k for k in ("epochs", "batch_size", "optimizer") if k not in fixed]
        if missing:
            raise ConfigError(f"models[{index}]: missing {missing}")
        return SearchSpace(
            architecture=arch,
            epochs=(fixed["epochs"],),
            batch_size=(fixed["batch_size"],),
            optimizer=(fixed["optimizer"],),
            hidden_layers=(fixed["hidden_layers"],) if "hidden_layers" in fixed else None,
            activation=(fixed["activation"],) if "activation" in fixed else None,
            neurons=(fixed["neurons"],) if "neurons" in fixed else None,
        )
    except ValueError as exc:
        raise ConfigError(f"models[{index}]: {exc}") from exc


def _parse_affect(value) -> tuple:
    if value is None:
        return ()
    if not isinstance(value, list):
        raise ConfigError("affect must be a list of record files")
    entries = []
    for i, item in enumerate(value):
        if isinstance(item, str):
            entries.append(AffectInput(records=item))
        elif isinstance(item, dict):
            unknown = set(item) - {"records", "comments"}
            if unknown:
                raise ConfigError(f"affect[{i}]: unknown keys {sorted(unknown)}")
            if "records" not in item:
                raise ConfigError(f"affect[{i}]: records path is required")
            entries.append(AffectInput(records=item["records"], comments=item.get("comments")))
        else:
            raise ConfigError(f"affect[{i}] must be a path or a records/comments mapping")
    return tuple(entries)


def _parse_indicators(value) -> tuple | None:
    if value is None:
        return None
    if not isinstance(value, list):
        raise ConfigError("indicators must be a list of indicator mappings")
    specs = []
    for i, item in enumerate(value):
        if not isinstance(item, dict):
            raise ConfigError(f"indicators[{i}] must be a mapping")
        unknown = set(item) - {"name", "window", "lag", "params"}
        if unknown:
            raise ConfigError(f"indicators[{i}]: unknown keys {sorted(unknown)}")
        if "name" not in item:
            raise ConfigError(f"indicators[{i}]: name is required")
        try:
            specs.append(
                IndicatorSpec(
                    name=item["name"],
                    window=item.get("window"),
                    lag=item.get("lag", 1),
                    params=item.get("params", {}),
                )
            )
        except ValueError as exc:
            raise ConfigError(f"indicators[{i}]: {exc}") from exc
    return tuple(specs)


def _resolve(value, base: Path):
    if value is None:
        return None
    if not isinstance(value, str) or not value:
        raise ConfigError(f"expected a file path, got {value!r}")
    p = Path(value)
    return str(p if p.is_absolute() else base / p)


def load_config(path) -> ExperimentConfig:
    """Parse and fully validate a YAML experiment config.

    Every check runs before any pipeline work: unknown keys, bad enum values,
    malformed model entries and missing input files all fail here. Input file
    paths are resolved relative to the config file's directory; the output
    directory is taken as given, so it resolves against the working directory.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a key-value mapping")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    for key in ("asset", "frequency", "candles", "feature_set", "seed", "models"):
        if key not in raw:
            raise ConfigError(f"{path}: {key} is required")
    if not isinstance(raw["models"], list):
        raise ConfigError(f"{path}: models must be a list")

    split_value = raw.get("split", [0.7, 0.15, 0.15])
    if not isinstance(split_value, (list, tuple)):
        raise ConfigError(f"{path}: split must be a list of three fractions")
    try:
        fractions = tuple(float(f) for f in split_value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: split must hold numbers: {exc}") from exc

    base = path.parent
    affect = tuple(
        AffectInput(records=_resolve(e.records, base), comments=_resolve(e.comments, base))
        for e in _parse_affect(raw.get("affect"))
    )
    return ExperimentConfig(
        asset=raw["asset"],
        frequency=raw["frequency"],
        candles=_resolve(raw["candles"], base),
        candle_format=raw.get("candle_format", "canonical_csv"),
        affect=affect,
        lexicon=_resolve(raw.get("lexicon"), base),
        feature_set=raw["feature_set"],
        lag=raw.get("lag", 1),
        indicators=_parse_indicators(raw.get("indicators")),
        split=fractions,
        iterations=raw.get("iterations", 200),
        objective=raw.get("objective", "accuracy"),
        oob_fraction=raw.get("oob_fraction"),
        seed=raw["seed"],
        models=tuple(_parse_model(m, i) for i, m in enumerate(raw["models"])),
        out=raw.get("out", "outputs"),
        workers=raw.get("workers", 1),
    )


class Workspace:
    """Artifact directory with atomic writes and per-stage rollback."""

    def __init__(self, root):
        self.root = Path(root)
        self.written: list[Path] = []

    @contextmanager
    def atomic(self, name: str):
        """Yield a temporary path that replaces root/name only on success.

        The temporary keeps the real file name as a suffix so writers that
        sniff the extension (the figure renderer does) behave normally.
        """
        final = self.root / name
        final.parent.mkdir(parents=True, exist_ok=True)
        tmp = final.with_name(f".tmp.{final.name}")
        try:
            yield tmp
        except BaseException:
            tmp.unlink(missing_ok=True)
            raise
        os.replace(tmp, final)
        self.written.append(final)

    def require(self, name: str, stage: str) -> Path:
        p = self.root / name
        if not p.is_file():
            raise DataError(f"missing artifact {p}; run the {stage} stage first")
        return p

    def rollback(self, mark: int) -> None:
        for p in self.written[mark:]:
            p.unlink(missing_ok=True)
        del self.written[mark:]


def _read_comment_rows(path):
    """Rows of (timestamp, source, channel, text), stably sorted by time."""
    rows = _read_rows(path)
    header_line, header = rows[0]
    if tuple(h.lower() for h in header) != COMMENT_HEADER:
        raise DataError(f"{path}: line {header_line}: expected header {','.join(COMMENT_HEADER)}")
    out = []
    for lineno, row in rows[1:]:
        if len(row) != len(COMMENT_HEADER):
            raise DataError(f"{path}: line {lineno}: expected {len(COMMENT_HEADER)} columns")
        try:
            ts = int(row[0])
        except ValueError as exc:
            raise DataError(f"{path}: line {lineno}: bad timestamp {row[0]!r}") from exc
        out.append((ts, row[1], row[2], row[3]))
    out.sort(key=lambda r: r[0])
    return out


def _fill_vad(records: AffectRecordSet, comments_path, lexicon) -> AffectRecordSet:
    """Rescore the VAD columns of records from their paired comment texts.

    The comments file must hold exactly one row per record; rows are matched
    by position after both sides are stably sorted by timestamp, and the
    (timestamp, source, channel) triple must agree at every position.
    """
    comments = _read_comment_rows(comments_path)
    if len(comments) != len(records):
        raise DataError(
            f"{comments_path}: {len(comments)} comments for {len(records)} affect records"
        )
    filled = []
    for rec, (ts, source, channel, text) in zip(records, comments):
        if (rec.timestamp, rec.source, rec.channel) != (ts, source, channel):
            raise DataError(f"{comments_path}: comment rows do not line up with the affect records")
        v, a, d = score_vad(text, lexicon)
        filled.append(replace(rec, valence=v, arousal=a, dominance=d))
    return AffectRecordSet(filled)


def _load_candles(ws: Workspace):
    return read_candles(ws.require("candles.csv", "ingest"), "canonical_csv")


def _affect_artifact(index: int) -> str:
    return f"affect_{index:02d}.csv"


def _model_artifact(index: int, architecture: str) -> str:
    return f"model_{index:02d}_{architecture}.cmnn"


def stage_ingest(config: ExperimentConfig, ws: Workspace) -> None:
    """Read and validate every input, writing the canonical candle series."""
    series = read_candles(config.candles, config.candle_format)
    if series.frequency != config.frequency:
        if series.frequency == "hourly" and config.frequency == "daily":
            series = resample(series, "daily")
        else:
            raise DataError(
                f"candles are {series.frequency} but the config wants {config.frequency}"
            )
    if config.lexicon is not None:
        read_vad_lexicon(config.lexicon)
    for entry in config.affect:
        read_affect_records(entry.records)
        if entry.comments is not None:
            _read_comment_rows(entry.comments)
    with ws.atomic("candles.csv") as tmp:
        write_candles(series, tmp)


def stage_features(config: ExperimentConfig, ws: Workspace) -> None:
    series = _load_candles(ws)
    if config.feature_set == "unrestricted":
        specs = list(config.indicators) if config.indicators is not None else default_specs()
        frame = indicator_frame(series, specs)
        with ws.atomic("indicators.csv") as tmp:
            write_indicator_frame(frame, tmp)
    lexicon = read_vad_lexicon(config.lexicon) if config.lexicon is not None else None
    for i, entry in enumerate(config.affect):
        records = read_affect_records(entry.records)
        if entry.comments is not None:
            records = _fill_vad(records, entry.comments, lexicon)
        bucketed = aggregate_affect(records, config.frequency, series.timestamps)
        with ws.atomic(_affect_artifact(i)) as tmp:
            write_affect_series(bucketed, tmp)


def stage_label(config: ExperimentConfig, ws: Workspace) -> None:
    series = _load_candles(ws)
    labels = label_movements(series)
    lines = ["timestamp,label"]
    lines.extend(f"{int(t)},{int(v)}" for t, v in zip(series.timestamps[:-1], labels))
    with ws.atomic("labels.csv") as tmp:
        tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")


def stage_dataset(config: ExperimentConfig, ws: Workspace) -> None:
    series = _load_candles(ws)
    frame = None
    if config.feature_set == "unrestricted":
        frame = read_indicator_frame(ws.require("indicators.csv", "features"))
    affect = []
    if config.feature_set in ("technical_social", "unrestricted"):
        for i in range(len(config.affect)):
            affect.append(read_affect_series(ws.require(_affect_artifact(i), "features")))
    ds = build_dataset(
        series,
        frame=frame,
        affect=affect,
        feature_set=config.feature_set,
        lag=config.lag,
    )
    train, val, test = split(ds, config.split)
    train, (val, test), _ = normalize(train, (val, test))
    for name, part in (("train.csv", train), ("val.csv", val), ("test.csv", test)):
        with ws.atomic(name) as tmp, ws.atomic(name + ".meta") as tmp_meta:
            write_dataset(part, tmp, tmp_meta)


def stage_tune(config: ExperimentConfig, ws: Workspace) -> None:
    train = read_dataset(ws.require("train.csv", "dataset"))
    all_results = []
    best_specs = []
    for mi, space in enumerate(config.models):
        base = _stream_seed(config.seed, _TUNE_STREAM, mi)
        log.info("searching models[%d] (%s, %d configurations)", mi, space.architecture, len(grid(space)))
        best, results = grid_search(
            space,
            train,
            iterations=config.iterations,
            base_seed=base,
            objective=config.objective,
            workers=config.workers,
            oob_fraction=config.oob_fraction,
        )
        all_results.extend(results)
        best_specs.append(best)
    with ws.atomic("results.csv") as tmp:
        write_results_csv(all_results, tmp)
    payload = []
    for spec in best_specs:
        payload.append(
            {
                "architecture": spec.architecture,
                "epochs": spec.epochs,
                "hidden_layers": spec.hidden_layers,
                "batch_size": spec.batch_size,
                "optimizer": spec.optimizer,
                "activation": spec.activation,
                "neurons": spec.neurons,
                "learning_rate": spec.learning_rate,
            }
        )
    with ws.atomic("best_specs.json") as tmp:
        tmp.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _read_best_specs(config: ExperimentConfig, ws: Workspace) -> list[NetworkSpec]:
    path = ws.require("best_specs.json", "tune")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        specs = [NetworkSpec(**entry) for entry in payload]
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from exc
    if len(specs) != len(config.models):
        raise DataError(
            f"{path} holds {len(specs)} specs but the config lists {len(config.models)} models;"
            " re-run the tune stage"
        )
    return specs


def stage_train(config: ExperimentConfig, ws: Workspace) -> None:
    """Refit each selected configuration on the train and validation rows."""
    train = read_dataset(ws.require("train.csv", "dataset"))
    val = read_dataset(ws.require("val.csv", "dataset"))
    X = np.vstack([train.X, val.X])
    y = np.concatenate([train.y, val.y])
    for mi, spec in enumerate(_read_best_specs(config, ws)):
        seeded = replace(spec, seed=_stream_seed(config.seed, _TRAIN_STREAM, mi))
        model = fit(seeded, X, y, sequence_len=config.lag, normalization=train.normalization)
        with ws.atomic(_model_artifact(mi, spec.architecture)) as tmp:
            save_model(model, tmp)


def stage_evaluate(config: ExperimentConfig, ws: Workspace) -> None:
    test = read_dataset(ws.require("test.csv", "dataset"))
    rows = []
    for mi, spec in enumerate(_read_best_specs(config, ws)):
        model = load_model(ws.require(_model_artifact(mi, spec.architecture), "train"))
        labels, _ = predict(model, test.X)
        report = classification_report(confusion(test.y, labels))
        rows.extend(rows_from_report(config.feature_set, config.asset, model.spec, report))
    with ws.atomic("report.csv") as tmp, ws.atomic("report.txt") as tmp_text:
        emit_report(rows, tmp, tmp_text)


def _read_results_csv(path) -> list[tuple[str, MetricDistribution]]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    out = []
    for i, line in enumerate(lines[1:]):
        cells = line.split(",")
        if len(cells) != 17:
            raise DataError(f"{path}: row {i + 1}: expected 17 cells")
        dist = MetricDistribution(
            *(float(c) for c in cells[7:15]),
            iterations=int(cells[15]),
            failures=int(cells[16]),
            seed=0,
        )
        out.append((f"{i:02d} {cells[0]}", dist))
    return out


def stage_report(config: ExperimentConfig, ws: Workspace) -> None:
    """Render figures and write the run manifest."""
    parts = [read_dataset(ws.require(name, "dataset")) for name in ("train.csv", "val.csv", "test.csv")]
    y_all = np.concatenate([p.y for p in parts])
    dist = class_distribution(y_all)
    with ws.atomic("figures/class_balance.png") as tmp:
        figures.save_class_distribution(dist, tmp, title=f"{config.asset} movement balance")

    results = _read_results_csv(ws.require("results.csv", "tune"))
    live = [
        (i, label, d)
        for i, (label, d) in enumerate(results)
        if not d.failed and math.isfinite(d.acc_mean)
    ]
    live.sort(key=lambda t: (-t[2].acc_mean, t[0]))
    with ws.atomic("figures/metric_bars.png") as tmp:
        figures.save_metric_bars([(label, d) for _, label, d in live[:8]], tmp)

    traces = {}
    specs = _read_best_specs(config, ws)
    for mi, spec in enumerate(specs):
        model = load_model(ws.require(_model_artifact(mi, spec.architecture), "train"))
        traces[f"{mi:02d} {spec.architecture}"] = model.loss_trace
    with ws.atomic("figures/loss_traces.png") as tmp:
        figures.save_loss_traces(traces, tmp)

    candles = _load_candles(ws)
    manifest = {
        "format": "cryptomove-manifest",
        "version": 1,
        "asset": config.asset,
        "frequency": config.frequency,
        "feature_set": config.feature_set,
        "lag": config.lag,
        "config_sha256": config.digest(),
        "seeds": {
            "base": config.seed,
            "tune": [_stream_seed(config.seed, _TUNE_STREAM, mi) for mi in range(len(config.models))],
            "train": [_stream_seed(config.seed, _TRAIN_STREAM, mi) for mi in range(len(config.models))],
        },
        "rows": {
            "candles": len(candles),
            "dataset": int(sum(len(p) for p in parts)),
            "train": len(parts[0]),
            "val": len(parts[1]),
            "test": len(parts[2]),
        },
        "features": int(parts[0].X.shape[1]),
        "class_distribution": {
            "n": dist.n,
            "counts": {"down": dist.counts[0], "up": dist.counts[1]},
            "percentages": {"down": dist.percentages[0], "up": dist.percentages[1]},
            "raw_percentages": {"down": dist.raw_percentages[0], "up": dist.raw_percentages[1]},
        },
        "artifacts": _artifact_checksums(ws.root),
    }
    with ws.atomic("manifest.json") as tmp:
        tmp.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _artifact_checksums(root: Path) -> dict:
    out = {}
    for p in sorted(root.rglob("*")):
        if not p.is_file() or p.name == "manifest.json" or p.name.startswith(".tmp."):
            continue
        out[p.relative_to(root).as_posix()] = hashlib.sha256(p.read_bytes()).hexdigest()
    return out


_STAGE_FUNCS = {
    "ingest": stage_ingest,
    "features": stage_features,
    "label": stage_label,
    "dataset": stage_dataset,
    "tune": stage_tune,
    "train": stage_train,
    "evaluate": stage_evaluate,
    "report": stage_report,
}


@dataclass(frozen=True)
class RunResult:
    """Exit status plus every artifact path the run wrote."""

    exit_code: int
    artifacts: tuple


def run_experiment(config: ExperimentConfig, stage: str | None = None) -> RunResult:
    """Run the full pipeline, or a single named stage, for one config.

    Raises a PipelineError subclass carrying the matching exit code when a
    stage fails; artifacts the failing stage had written are removed first.
    """
    if stage is not None and stage not in STAGES:
        raise ConfigError(f"unknown stage {stage!r}, expected one of {STAGES}")
    ws = Workspace(config.out)
    try:
        ws.root.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {ws.root}: {exc}") from exc
    for name in STAGES if stage is None else (stage,):
        mark = len(ws.written)
        log.info("stage %s", name)
        try:
            _STAGE_FUNCS[name](config, ws)
        except PipelineError:
            ws.rollback(mark)
            raise
        except OSError as exc:
            ws.rollback(mark)
            raise OutputError(f"stage {name}: {exc}") from exc
    return RunResult(0, tuple(ws.written))
