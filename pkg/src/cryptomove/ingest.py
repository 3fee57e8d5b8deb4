"""Read, validate, and resample market candles, affect records, and the VAD lexicon.

All readers are pure functions of file content and return immutable-by-convention
values; nothing here fills gaps or invents data.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError

HOURLY_STEP = 3600
DAILY_STEP = 86400
FREQUENCY_STEPS = {"hourly": HOURLY_STEP, "daily": DAILY_STEP}

CANDLE_HEADER = ("timestamp", "open", "high", "low", "close", "volume")
AFFECT_HEADER = (
    "timestamp",
    "source",
    "channel",
    "sentiment",
    "love",
    "joy",
    "anger",
    "sadness",
    "valence",
    "arousal",
    "dominance",
)
LEXICON_HEADER = ("token", "valence", "arousal", "dominance")

AFFECT_SOURCES = ("github", "reddit")

_TIMESTAMP_ALIASES = ("timestamp", "time", "date", "unix", "unix timestamp")


@dataclass
class CandleSeries:
    """Timestamped OHLCV bars at a fixed frequency.

    Timestamps are UTC unix seconds, strictly increasing, and aligned to the
    frequency grid (multiples of the bar step); gaps are allowed, duplicates
    are not. Arrays are treated as immutable once constructed.
    """

    frequency: str
    timestamps: np.ndarray
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray
    volume: np.ndarray

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def step(self) -> int:
        return FREQUENCY_STEPS[self.frequency]

    def validate(self) -> None:
        """Raise ValidationError if any series invariant is violated."""
        if self.frequency not in FREQUENCY_STEPS:
            raise ValidationError(f"unknown frequency {self.frequency!r}")
        n = len(self.timestamps)
        for name in ("open", "high", "low", "close", "volume"):
            if len(getattr(self, name)) != n:
                raise ValidationError(f"column {name} length differs from time axis")
        if n == 0:
            return
        if np.any(np.diff(self.timestamps) <= 0):
            i = int(np.nonzero(np.diff(self.timestamps) <= 0)[0][0])
            if self.timestamps[i] == self.timestamps[i + 1]:
                raise ValidationError(f"duplicate timestamp {int(self.timestamps[i])}")
            raise ValidationError("timestamps not strictly increasing")
        off = np.nonzero(self.timestamps % self.step != 0)[0]
        if off.size:
            raise ValidationError(
                f"timestamp {int(self.timestamps[off[0]])} not aligned to the "
                f"{self.frequency} grid"
            )
        for name in ("open", "high", "low", "close", "volume"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValidationError(f"non-finite value in column {name}")
        if np.any(self.volume < 0):
            raise ValidationError("negative volume")
        body_hi = np.maximum(self.open, self.close)
        body_lo = np.minimum(self.open, self.close)
        bad = np.nonzero((self.high < body_hi) | (self.low > body_lo))[0]
        if bad.size:
            raise ValidationError(
                f"OHLC envelope violated at timestamp {int(self.timestamps[bad[0]])}"
            )


@dataclass(frozen=True)
class AffectRecord:
    """One comment's affect scores."""

    timestamp: int
    source: str
    channel: str
    sentiment: int
    love: float
    joy: float
    anger: float
    sadness: float
    valence: float
    arousal: float
    dominance: float


@dataclass
class AffectRecordSet:
    """Validated per-comment affect records in timestamp order."""

    records: list[AffectRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def channels(self) -> list[tuple[str, str]]:
        """Distinct (source, channel) pairs in first-seen order."""
        seen: dict[tuple[str, str], None] = {}
        for r in self.records:
            seen.setdefault((r.source, r.channel), None)
        return list(seen)


@dataclass
class VadLexicon:
    """Map from lowercase token to (valence, arousal, dominance)."""

    entries: dict[str, tuple[float, float, float]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, token: str) -> bool:
        return token in self.entries

    def get(self, token: str):
        return self.entries.get(token)


def _read_rows(path):
    text = Path(path).read_text(encoding="utf-8")
    rows = []
    for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        rows.append((lineno, [cell.strip() for cell in row]))
    if not rows:
        raise ParseError(f"{path}: empty file, header row required")
    return rows


def _number(cell: str, path, lineno: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ParseError(
            f"{path}: line {lineno}: non-numeric {column} value {cell!r}"
        ) from None
    if not np.isfinite(value):
        raise ValidationError(f"{path}: line {lineno}: non-finite {column} value")
    return value


def _epoch_seconds(cell: str, path, lineno: int) -> int:
    value = _number(cell, path, lineno, "timestamp")
    if abs(value) >= 1e12:  # millisecond epoch from exchange exports
        value /= 1000.0
    if value != int(value):
        raise ParseError(f"{path}: line {lineno}: timestamp {cell!r} is not whole seconds")
    return int(value)


def _infer_frequency(timestamps: np.ndarray) -> str:
    deltas = np.diff(timestamps)
    if deltas.size == 0:
        return "hourly"
    if np.all(deltas % DAILY_STEP == 0):
        return "daily"
    if np.all(deltas % HOURLY_STEP == 0):
        return "hourly"
    raise ValidationError("timestamp spacing fits neither the hourly nor the daily grid")


def read_candles(path, source_format: str = "canonical_csv", frequency: str | None = None) -> CandleSeries:
    """Read an OHLCV CSV into a validated CandleSeries.

    source_format "canonical_csv" expects the exact canonical header, while
    "exchange_csv" accepts common export quirks: any column order, descending
    rows, millisecond timestamps, extra columns (first volume-like column is
    used). Rows are sorted ascending regardless of file order. When frequency
    is not given it is inferred from timestamp spacing (single-row and empty
    files default to hourly).
    """
    if source_format not in ("canonical_csv", "exchange_csv"):
        raise ValueError(f"unknown source_format {source_format!r}")
    rows = _read_rows(path)
    header_line, header = rows[0]
    names = [h.lower() for h in header]

    if source_format == "canonical_csv":
        if tuple(names) != CANDLE_HEADER:
            raise ParseError(
                f"{path}: line {header_line}: expected header "
                f"{','.join(CANDLE_HEADER)}, got {','.join(names)}"
            )
        index = {name: i for i, name in enumerate(CANDLE_HEADER)}
    else:
        index = {}
        for alias in _TIMESTAMP_ALIASES:
            if alias in names:
                index["timestamp"] = names.index(alias)
                break
        for name in ("open", "high", "low", "close"):
            if name in names:
                index[name] = names.index(name)
        for i, name in enumerate(names):
            if name == "volume" or name.startswith("volume"):
                index.setdefault("volume", i)
        missing = [c for c in CANDLE_HEADER if c not in index]
        if missing:
            raise ParseError(f"{path}: could not locate columns: {', '.join(missing)}")

    width = len(header)
    ts, cols = [], {name: [] for name in CANDLE_HEADER[1:]}
    for lineno, row in rows[1:]:
        if source_format == "canonical_csv" and len(row) != width:
            raise ParseError(
                f"{path}: line {lineno}: expected {width} columns, got {len(row)}"
            )
        if max(index.values()) >= len(row):
            raise ParseError(f"{path}: line {lineno}: too few columns")
        ts.append(_epoch_seconds(row[index["timestamp"]], path, lineno))
        for name in cols:
            cols[name].append(_number(row[index[name]], path, lineno, name))

    timestamps = np.asarray(ts, dtype=np.int64)
    order = np.argsort(timestamps, kind="stable")
    timestamps = timestamps[order]
    series = CandleSeries(
        frequency=frequency or _infer_frequency(timestamps),
        timestamps=timestamps,
        **{name: np.asarray(values, dtype=np.float64)[order] for name, values in cols.items()},
    )
    series.validate()
    return series


def write_candles(series: CandleSeries, path) -> None:
    """Write a CandleSeries as canonical CSV; re-reading yields an identical series."""
    lines = [",".join(CANDLE_HEADER)]
    for i in range(len(series)):
        cells = [str(int(series.timestamps[i]))]
        cells += [repr(float(getattr(series, c)[i])) for c in CANDLE_HEADER[1:]]
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def resample(candles: CandleSeries, target: str = "daily") -> CandleSeries:
    """Aggregate hourly bars into UTC calendar days.

    Per day: open is the first bar's open, close the last bar's close, high and
    low the extremes, volume the sum. Days with no bars are omitted.
    """
    if target != "daily":
        raise ValueError(f"unsupported resample target {target!r}")
    if candles.frequency != "hourly":
        raise ValueError("resample input must be finer than the target (hourly bars)")
    n = len(candles)
    if n == 0:
        return CandleSeries(
            "daily",
            *(np.asarray([], dtype=d) for d in (np.int64,) + (np.float64,) * 5),
        )
    days = candles.timestamps // DAILY_STEP
    # bars are strictly increasing, so each day's bars are contiguous
    boundaries = np.nonzero(np.diff(days))[0] + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [n]))
    out = {
        "timestamps": days[starts] * DAILY_STEP,
        "open": candles.open[starts],
        "close": candles.close[ends - 1],
        "high": np.maximum.reduceat(candles.high, starts),
        "low": np.minimum.reduceat(candles.low, starts),
        "volume": np.add.reduceat(candles.volume, starts),
    }
    series = CandleSeries(frequency="daily", **out)
    series.validate()
    return series


def read_affect_records(path) -> AffectRecordSet:
    """Read and validate an affect CSV (see AFFECT_HEADER for the schema)."""
    rows = _read_rows(path)
    header_line, header = rows[0]
    if tuple(h.lower() for h in header) != AFFECT_HEADER:
        raise ParseError(
            f"{path}: line {header_line}: expected header {','.join(AFFECT_HEADER)}"
        )
    records = []
    for lineno, row in rows[1:]:
        if len(row) != len(AFFECT_HEADER):
            raise ParseError(
                f"{path}: line {lineno}: expected {len(AFFECT_HEADER)} columns, got {len(row)}"
            )
        timestamp = _epoch_seconds(row[0], path, lineno)
        source, channel = row[1], row[2]
        if source not in AFFECT_SOURCES:
            raise ValidationError(
                f"{path}: line {lineno}: source must be one of {AFFECT_SOURCES}, got {source!r}"
            )
        sentiment_raw = _number(row[3], path, lineno, "sentiment")
        if sentiment_raw not in (-1.0, 0.0, 1.0):
            raise ValidationError(
                f"{path}: line {lineno}: sentiment must be -1, 0, or 1, got {row[3]!r}"
            )
        values = {
            name: _number(cell, path, lineno, name)
            for name, cell in zip(AFFECT_HEADER[4:], row[4:])
        }
        for name, value in values.items():
            if value < 0:
                raise ValidationError(f"{path}: line {lineno}: negative {name} value")
        records.append(
            AffectRecord(timestamp=timestamp, source=source, channel=channel,
                         sentiment=int(sentiment_raw), **values)
        )
    records.sort(key=lambda r: r.timestamp)
    return AffectRecordSet(records)


def read_vad_lexicon(path) -> VadLexicon:
    """Read a token,valence,arousal,dominance CSV; tokens are lowercased."""
    rows = _read_rows(path)
    header_line, header = rows[0]
    if tuple(h.lower() for h in header) != LEXICON_HEADER:
        raise ParseError(
            f"{path}: line {header_line}: expected header {','.join(LEXICON_HEADER)}"
        )
    entries: dict[str, tuple[float, float, float]] = {}
    for lineno, row in rows[1:]:
        if len(row) != 4:
            raise ParseError(f"{path}: line {lineno}: expected 4 columns, got {len(row)}")
        token = row[0].lower()
        if token in entries:
            raise ValidationError(f"{path}: line {lineno}: duplicate token {token!r}")
        entries[token] = tuple(
            _number(cell, path, lineno, name) for name, cell in zip(LEXICON_HEADER[1:], row[1:])
        )
    return VadLexicon(entries)
