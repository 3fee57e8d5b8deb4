"""Lexicon VAD scoring and time-bucketed aggregation of comment affect.

Per-comment records are averaged into hourly or daily buckets along a caller
supplied timestamp axis, one nine-column group per (source, channel) pair.
Hours or days with no comments carry zeros: absent discussion is treated as a
zero-affect signal rather than missing data.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, ValidationError
from .ingest import FREQUENCY_STEPS, AffectRecordSet, VadLexicon, _read_rows

log = logging.getLogger(__name__)

AFFECT_METRICS = (
    "sentiment",
    "love",
    "joy",
    "anger",
    "sadness",
    "valence",
    "arousal",
    "dominance",
    "comment_count",
)

_MEAN_METRICS = AFFECT_METRICS[:-1]
_TOKEN_RE = re.compile(r"[0-9A-Za-z]+")


def score_vad(text: str, lexicon: VadLexicon) -> tuple[float, float, float]:
    """Mean (valence, arousal, dominance) over lexicon-matched tokens.

    Tokens are maximal alphanumeric runs, lowercased before lookup. A text
    with no matched tokens scores (0, 0, 0).

    Averaging over matched tokens (rather than summing) keeps the score
    independent of comment length; the alternative is a one-line change here.
    """
    hits = [lexicon.get(tok.lower()) for tok in _TOKEN_RE.findall(text)]
    hits = [h for h in hits if h is not None]
    if not hits:
        return (0.0, 0.0, 0.0)
    v, a, d = np.asarray(hits, dtype=np.float64).mean(axis=0)
    return (float(v), float(a), float(d))


@dataclass
class AffectSeries:
    """Bucketed affect means on a fixed timestamp axis.

    columns maps "<source>.<channel>.<metric>" to a float64 array over the
    axis. comment_count columns hold integral values; all other columns are
    bucket means and lie within the range of the bucket's contributing
    records. excluded counts the records whose bucket was not on the axis.
    """

    frequency: str
    timestamps: np.ndarray
    channels: list[str]
    columns: dict[str, np.ndarray] = field(default_factory=dict)
    excluded: int = 0

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def names(self) -> list[str]:
        return [f"{ch}.{m}" for ch in self.channels for m in AFFECT_METRICS]

    def matrix(self) -> np.ndarray:
        """Column-stacked values, channel-major then metric order."""
        if not self.channels:
            return np.zeros((len(self), 0))
        return np.column_stack([self.columns[name] for name in self.names])


def _validate_axis(axis: np.ndarray, frequency: str) -> int:
    if frequency not in FREQUENCY_STEPS:
        raise ValueError(f"unknown frequency {frequency!r}")
    step = FREQUENCY_STEPS[frequency]
    if len(axis) and (np.diff(axis) <= 0).any():
        raise ValidationError("axis timestamps must be strictly increasing")
    if len(axis) and (axis % step != 0).any():
        raise ValidationError(f"axis timestamps must be aligned to the {frequency} grid")
    return step


def _bucket_means(pos: np.ndarray, values: np.ndarray, n: int) -> np.ndarray:
    """Per-bucket means, summed in (bucket, value) order.

    Sorting contributions by value before summation makes the result exactly
    independent of record order, not just up to float rounding.
    """
    counts = np.bincount(pos, minlength=n)
    sums = np.zeros(n)
    if len(values):
        order = np.lexsort((values, pos))
        spos, svals = pos[order], values[order]
        starts = np.flatnonzero(np.concatenate(([True], spos[1:] != spos[:-1])))
        sums[spos[starts]] = np.add.reduceat(svals, starts)
    out = np.zeros(n)
    hit = counts > 0
    out[hit] = sums[hit] / counts[hit]
    return out


def aggregate_affect(records: AffectRecordSet, frequency: str, axis) -> AffectSeries:
    """Average per-comment records into buckets along the given axis.

    Each record lands in the bucket whose start is its timestamp floored to
    the frequency grid. Records whose bucket is not on the axis are excluded
    from every column but counted in the result's `excluded` field.
    """
    axis = np.asarray(axis, dtype=np.int64)
    step = _validate_axis(axis, frequency)
    n = len(axis)
    index = {int(t): i for i, t in enumerate(axis)}

    channels = [f"{source}.{channel}" for source, channel in records.channels()]
    grouped: dict[str, list] = {ch: [] for ch in channels}
    excluded = 0
    for rec in records:
        bucket = rec.timestamp - rec.timestamp % step
        pos = index.get(bucket)
        if pos is None:
            excluded += 1
            continue
        grouped[f"{rec.source}.{rec.channel}"].append((pos, rec))
    if excluded:
        log.warning("%d affect records fell outside the %s axis and were excluded", excluded, frequency)

    columns: dict[str, np.ndarray] = {}
    for ch in channels:
        entries = grouped[ch]
        pos = np.array([p for p, _ in entries], dtype=np.intp)
        counts = np.bincount(pos, minlength=n) if len(entries) else np.zeros(n, dtype=np.int64)
        for metric in _MEAN_METRICS:
            vals = np.array([getattr(r, metric) for _, r in entries], dtype=np.float64)
            columns[f"{ch}.{metric}"] = _bucket_means(pos, vals, n)
        columns[f"{ch}.comment_count"] = counts.astype(np.float64)
    return AffectSeries(frequency, axis, channels, columns, excluded)


def write_affect_series(series: AffectSeries, path) -> None:
    """Write the wide CSV form: timestamp column then one column per name."""
    names = series.names
    lines = ["timestamp," + ",".join(names)]
    for i in range(len(series)):
        cells = [str(int(series.timestamps[i]))]
        for name in names:
            value = float(series.columns[name][i])
            cells.append(str(int(value)) if name.endswith(".comment_count") else repr(value))
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_affect_series(path) -> AffectSeries:
    """Read a wide affect CSV written by write_affect_series."""
    rows = _read_rows(path)
    header_line, header = rows[0]
    if not header or header[0].lower() != "timestamp":
        raise ParseError(f"{path}: line {header_line}: first column must be timestamp")
    names = header[1:]
    channels: list[str] = []
    for name in names:
        parts = name.rsplit(".", 1)
        if len(parts) != 2 or parts[1] not in AFFECT_METRICS:
            raise ParseError(f"{path}: line {header_line}: unrecognized affect column {name!r}")
        if parts[0] not in channels:
            channels.append(parts[0])
    expected = [f"{ch}.{m}" for ch in channels for m in AFFECT_METRICS]
    if names != expected:
        raise ParseError(
            f"{path}: line {header_line}: columns must be complete nine-metric channel groups"
        )

    timestamps, data = [], {name: [] for name in names}
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise ParseError(f"{path}: line {lineno}: expected {len(header)} columns, got {len(row)}")
        try:
            timestamps.append(int(row[0]))
            for name, cell in zip(names, row[1:]):
                data[name].append(float(cell))
        except ValueError as exc:
            raise ParseError(f"{path}: line {lineno}: {exc}") from exc

    axis = np.array(timestamps, dtype=np.int64)
    if len(axis) and (np.diff(axis) <= 0).any():
        raise ValidationError(f"{path}: timestamps must be strictly increasing")
    deltas = np.diff(axis)
    if len(deltas) and (deltas % FREQUENCY_STEPS["daily"] == 0).all() and (axis % FREQUENCY_STEPS["daily"] == 0).all():
        frequency = "daily"
    else:
        frequency = "hourly"
    _validate_axis(axis, frequency)
    columns = {name: np.array(vals, dtype=np.float64) for name, vals in data.items()}
    for ch in channels:
        counts = columns[f"{ch}.comment_count"]
        if (counts < 0).any() or (counts != np.round(counts)).any():
            raise ValidationError(f"{path}: {ch}.comment_count must hold non-negative integers")
    return AffectSeries(frequency, axis, channels, columns)
