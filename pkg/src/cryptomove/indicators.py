"""Trading indicators over OHLCV candles with explicit warm-up accounting.

Every indicator returns a float64 series aligned to the candle time axis in
which undefined entries (insufficient history, or a documented singularity
such as a zero denominator) are NaN, never silent zeros. The pinned formula
for each indicator is stated in its docstring; the catalogue mirrors the
widely used stock-statistics feature set: window ops (sma, wma, mstd, mvar,
rsv, boll, max/min in range, cci, wr, cr, vr, permutation, count), recursive
ops (ema, rsi, kdj, macd, atr, dmi family, trix, tema), and per-bar ops
(middle, tr, obv, log_return, compare, cross flags).

Default window is 10; MACD keeps the common 12/26 profile with a signal
window of 5, ADX smooths over 5, ADXR over 10, DMA compares the 10 and 50
bar averages. All of it can be overridden through IndicatorSpec.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ParseError, UnsupportedIndicatorError
from .ingest import CandleSeries

_RELATIONS = {
    "gt": np.greater,
    "ge": np.greater_equal,
    "lt": np.less,
    "le": np.less_equal,
    "eq": np.equal,
    "ne": np.not_equal,
}


@dataclass
class IndicatorSpec:
    """One requested indicator column.

    window is the rolling history size where applicable; lag is how far back
    the value sits relative to the row that consumes it (lag 1, the default
    everywhere, means the value computed at time t is the regressor for the
    t to t+1 movement, so the column is not shifted; lag k shifts it back by
    k-1 extra bars). params carries indicator-specific constants.
    """

    name: str
    window: int | None = None
    lag: int = 1
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.window is not None and (int(self.window) != self.window or self.window < 1):
            raise ValueError(f"window must be a positive integer, got {self.window!r}")
        if int(self.lag) != self.lag or self.lag < 0:
            raise ValueError(f"lag must be a non-negative integer, got {self.lag!r}")


@dataclass
class IndicatorFrame:
    """Aligned named indicator columns on a shared time axis.

    warmups[name] is the index of the first defined entry (len(axis) when the
    column never becomes defined). Entries past warm-up are finite except at
    the per-indicator singularities documented on the compute functions.
    """

    timestamps: np.ndarray
    columns: dict[str, np.ndarray]
    warmups: dict[str, int]

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def __len__(self) -> int:
        return len(self.timestamps)

    def matrix(self) -> np.ndarray:
        return np.column_stack([self.columns[n] for n in self.columns])


def _nan(n):
    return np.full(n, np.nan)


def _roll(a: np.ndarray, window: int) -> np.ndarray:
    """Trailing windows of a, shape (n-window+1, window)."""
    return sliding_window_view(a, window)


def _window_op(a, window, fn):
    out = _nan(len(a))
    if window <= len(a):
        out[window - 1 :] = fn(_roll(a, window))
    return out


def sma(close: np.ndarray, window: int) -> np.ndarray:
    """Arithmetic mean of the last `window` closes."""
    return _window_op(close, window, lambda w: w.mean(axis=1))


def wma(close: np.ndarray, window: int) -> np.ndarray:
    """Linearly weighted mean, newest bar carrying weight `window`."""
    weights = np.arange(1, window + 1, dtype=np.float64)
    denom = window * (window + 1) / 2.0
    return _window_op(close, window, lambda w: w @ weights / denom)


def ema(close: np.ndarray, window: int) -> np.ndarray:
    """Exponential moving average, alpha = 2/(window+1), adjusted form.

    out[t] = sum_i (1-a)^i x[t-i] / sum_i (1-a)^i over the full history, so
    the value is defined from the first bar and depends on the series origin.
    """
    alpha = 2.0 / (window + 1)
    decay = 1.0 - alpha
    out = np.empty(len(close))
    num = 0.0
    den = 0.0
    for t in range(len(close)):
        num = close[t] + decay * num
        den = 1.0 + decay * den
        out[t] = num / den
    return out


def mstd(close: np.ndarray, window: int) -> np.ndarray:
    """Rolling sample standard deviation (ddof=1); window 1 is all-undefined."""
    if window == 1:
        return _nan(len(close))
    return _window_op(close, window, lambda w: w.std(axis=1, ddof=1))


def mvar(close: np.ndarray, window: int) -> np.ndarray:
    """Rolling sample variance (ddof=1); window 1 is all-undefined."""
    if window == 1:
        return _nan(len(close))
    return _window_op(close, window, lambda w: w.var(axis=1, ddof=1))


def rsi(close: np.ndarray, window: int) -> np.ndarray:
    """Relative strength index with Wilder smoothing.

    The first value sits at index `window` (mean gain/loss over the first
    `window` price changes); later values use the (w-1)/w recursion. When both
    smoothed averages are zero (flat history) the value is pinned to 50.
    """
    n = len(close)
    out = _nan(n)
    if n <= window:
        return out
    diffs = np.diff(close)
    gains = np.maximum(diffs, 0.0)
    losses = np.maximum(-diffs, 0.0)
    avg_gain = gains[:window].mean()
    avg_loss = losses[:window].mean()
    for t in range(window, n):
        if t > window:
            avg_gain = (avg_gain * (window - 1) + gains[t - 1]) / window
            avg_loss = (avg_loss * (window - 1) + losses[t - 1]) / window
        total = avg_gain + avg_loss
        out[t] = 50.0 if total == 0.0 else 100.0 * avg_gain / total
    return out


def roc(close: np.ndarray, window: int) -> np.ndarray:
    """Fractional rate of change (close[t] - close[t-w]) / close[t-w]."""
    n = len(close)
    out = _nan(n)
    if n > window:
        past = close[:-window]
        with np.errstate(divide="ignore", invalid="ignore"):
            out[window:] = np.where(past != 0.0, (close[window:] - past) / past, np.nan)
    return out


def momentum(close: np.ndarray, window: int) -> np.ndarray:
    """Price difference close[t] - close[t-w]."""
    n = len(close)
    out = _nan(n)
    if n > window:
        out[window:] = close[window:] - close[:-window]
    return out


def obv(close: np.ndarray, volume: np.ndarray) -> np.ndarray:
    """On-balance volume, anchored at out[0] = volume[0].

    The level is origin-dependent (cumulative); increments are the contract.
    """
    if len(close) != len(volume):
        raise ValueError("close and volume must have equal length")
    if len(close) == 0:
        return _nan(0)
    delta = np.diff(close)
    steps = np.where(delta > 0, volume[1:], np.where(delta < 0, -volume[1:], 0.0))
    return np.cumsum(np.concatenate(([volume[0]], steps)))


def _true_range(candles: CandleSeries) -> np.ndarray:
    h, l, c = candles.high, candles.low, candles.close
    out = h - l
    if len(out) > 1:
        prev = c[:-1]
        out = out.copy()
        out[1:] = np.maximum.reduce([h[1:] - l[1:], np.abs(h[1:] - prev), np.abs(l[1:] - prev)])
    return out


def _wilder_smooth(values: np.ndarray, start: int, window: int) -> np.ndarray:
    """SMMA with simple-mean seed: defined from start+window-1 onward."""
    n = len(values)
    out = _nan(n)
    first = start + window - 1
    if first >= n:
        return out
    acc = values[start : first + 1].mean()
    out[first] = acc
    for t in range(first + 1, n):
        acc = (acc * (window - 1) + values[t]) / window
        out[t] = acc
    return out


def _rsv(candles: CandleSeries, window: int) -> np.ndarray:
    n = len(candles)
    out = _nan(n)
    if window > n:
        return out
    hmax = _roll(candles.high, window).max(axis=1)
    lmin = _roll(candles.low, window).min(axis=1)
    span = hmax - lmin
    c = candles.close[window - 1 :]
    out[window - 1 :] = np.where(span == 0.0, 50.0, 100.0 * (c - lmin) / np.where(span == 0, 1, span))
    return out


def _kdj(candles: CandleSeries, window: int):
    """K and D lines: x = (2/3) x_prev + (1/3) input, seeded from 50."""
    rsv = _rsv(candles, window)
    n = len(rsv)
    k = _nan(n)
    d = _nan(n)
    prev_k = 50.0
    prev_d = 50.0
    for t in range(window - 1, n):
        prev_k = (2.0 * prev_k + rsv[t]) / 3.0
        prev_d = (2.0 * prev_d + prev_k) / 3.0
        k[t] = prev_k
        d[t] = prev_d
    return k, d


def _dmi(candles: CandleSeries, window: int):
    """+DI and -DI per Wilder: conditional directional moves smoothed over TR."""
    h, l = candles.high, candles.low
    n = len(h)
    if n < 2:
        return _nan(n), _nan(n)
    up = h[1:] - h[:-1]
    down = l[:-1] - l[1:]
    pdm = np.where((up > down) & (up > 0), up, 0.0)
    mdm = np.where((down > up) & (down > 0), down, 0.0)
    tr_tail = _true_range(candles)[1:]
    sp = _wilder_smooth(pdm, 0, window)
    sm = _wilder_smooth(mdm, 0, window)
    st = _wilder_smooth(tr_tail, 0, window)
    with np.errstate(divide="ignore", invalid="ignore"):
        pdi_tail = np.where(st == 0.0, 0.0, 100.0 * sp / np.where(st == 0, 1, st))
        mdi_tail = np.where(st == 0.0, 0.0, 100.0 * sm / np.where(st == 0, 1, st))
    pdi = _nan(n)
    mdi = _nan(n)
    pdi[1:] = pdi_tail
    mdi[1:] = mdi_tail
    return pdi, mdi


def _dx(candles: CandleSeries, window: int) -> np.ndarray:
    pdi, mdi = _dmi(candles, window)
    total = pdi + mdi
    with np.errstate(invalid="ignore"):
        dx = np.where(total == 0.0, 0.0, 100.0 * np.abs(pdi - mdi) / np.where(total == 0, 1, total))
    dx[np.isnan(pdi)] = np.nan
    return dx


def _adx(candles: CandleSeries, window: int, dmi_window: int) -> np.ndarray:
    dx = _dx(candles, dmi_window)
    return _wilder_smooth(np.nan_to_num(dx), dmi_window, window)


def _series_ema_chain(close: np.ndarray, window: int):
    t1 = ema(close, window)
    t2 = ema(t1, window)
    t3 = ema(t2, window)
    return t1, t2, t3


def compute_indicator(spec: IndicatorSpec, candles: CandleSeries) -> np.ndarray:
    """Compute one catalogue indicator for a candle series.

    Raises UnsupportedIndicatorError for names outside the catalogue. The
    result is shifted back by (spec.lag - 1) bars; the default lag of 1 keeps
    the value at the bar it was computed on.
    """
    name = spec.name
    if name not in CATALOGUE:
        raise UnsupportedIndicatorError(name, CATALOGUE)
    w = spec.window if spec.window is not None else DEFAULT_WINDOWS.get(name)
    if w is not None:
        w = int(w)
    p = spec.params
    c, h, l, v = candles.close, candles.high, candles.low, candles.volume
    n = len(candles)

    if name == "sma":
        out = sma(c, w)
    elif name == "wma":
        out = wma(c, w)
    elif name == "ema":
        out = ema(c, w)
    elif name == "mstd":
        out = mstd(c, w)
    elif name == "mvar":
        out = mvar(c, w)
    elif name == "rsi":
        out = rsi(c, w)
    elif name == "roc":
        out = roc(c, w)
    elif name == "momentum":
        out = momentum(c, w)
    elif name == "obv":
        out = obv(c, v)
    elif name == "middle":
        out = (c + h + l) / 3.0
    elif name == "tr":
        out = _true_range(candles)
    elif name == "atr":
        out = _wilder_smooth(_true_range(candles), 0, w)
    elif name == "log_return":
        out = _nan(n)
        if n > 1:
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = c[1:] / c[:-1]
                out[1:] = np.where(ratio > 0, np.log(np.where(ratio > 0, ratio, 1.0)), np.nan)
    elif name == "max_in_range":
        out = _window_op(c, w, lambda win: win.max(axis=1))
    elif name == "min_in_range":
        out = _window_op(c, w, lambda win: win.min(axis=1))
    elif name == "permutation":
        # zero-based rank of the current close among the trailing window
        out = _window_op(c, w, lambda win: (win[:, :-1] < win[:, -1:]).sum(axis=1).astype(np.float64))
    elif name == "compare":
        relation = _RELATIONS[p.get("relation", "gt")]
        shift = int(p.get("shift", 1))
        if shift < 1:
            raise ValueError("compare shift must be >= 1")
        out = _nan(n)
        if n > shift:
            out[shift:] = relation(c[shift:], c[:-shift]).astype(np.float64)
    elif name in ("count", "count_fc"):
        relation = p.get("relation", "gt")
        shift = int(p.get("shift", 1))
        event = compute_indicator(
            IndicatorSpec("compare", params={"relation": relation, "shift": shift}), candles
        )
        out = _nan(n)
        if name == "count":
            first = shift + w - 1
            if first < n:
                out[first:] = _roll(event[shift:], w).sum(axis=1)
        else:
            # forward count; the trailing windows shrink with the horizon
            for t in range(shift, n):
                out[t] = np.nansum(event[t : t + w])
    elif name == "rsv":
        out = _rsv(candles, w)
    elif name == "kdjk":
        out = _kdj(candles, w)[0]
    elif name == "kdjd":
        out = _kdj(candles, w)[1]
    elif name == "kdjj":
        k, d = _kdj(candles, w)
        out = 3.0 * k - 2.0 * d
    elif name in ("boll_mid", "boll_ub", "boll_lb"):
        mid = sma(c, w)
        if name == "boll_mid":
            out = mid
        else:
            dev = 2.0 * mstd(c, w)
            out = mid + dev if name == "boll_ub" else mid - dev
    elif name in ("macd", "macds", "macdh"):
        fast = int(p.get("fast", 12))
        slow = int(p.get("slow", 26))
        line = ema(c, fast) - ema(c, slow)
        if name == "macd":
            out = line
        else:
            signal = ema(line, w if spec.window is not None else int(p.get("signal", 5)))
            out = signal if name == "macds" else line - signal
    elif name == "cr":
        # upward/downward energy vs the prior typical price
        out = _nan(n)
        if n >= 2:
            ym = ((c + h + l) / 3.0)[:-1]
            p1 = np.maximum(h[1:] - ym, 0.0)
            p2 = np.maximum(ym - l[1:], 0.0)
            if w <= n - 1:
                up_sum = _roll(p1, w).sum(axis=1)
                down_sum = _roll(p2, w).sum(axis=1)
                with np.errstate(divide="ignore", invalid="ignore"):
                    out[w:] = np.where(down_sum == 0.0, np.nan, 100.0 * up_sum / down_sum)
    elif name == "wr":
        out = _nan(n)
        if w <= n:
            hmax = _roll(h, w).max(axis=1)
            lmin = _roll(l, w).min(axis=1)
            span = hmax - lmin
            out[w - 1 :] = np.where(
                span == 0.0, -50.0, -100.0 * (hmax - c[w - 1 :]) / np.where(span == 0, 1, span)
            )
    elif name == "cci":
        out = _nan(n)
        if w <= n:
            tp = (c + h + l) / 3.0
            wins = _roll(tp, w)
            means = wins.mean(axis=1)
            mad = np.abs(wins - means[:, None]).mean(axis=1)
            num = tp[w - 1 :] - means
            out[w - 1 :] = np.where(mad == 0.0, 0.0, num / np.where(mad == 0, 1, 0.015 * mad))
    elif name in ("cross_up", "cross_down"):
        ref_w = w
        ref = sma(c, ref_w)
        above = c > ref
        out = _nan(n)
        if ref_w < n:
            prev = above[ref_w - 1 : -1]
            cur = above[ref_w:]
            flag = (~prev & cur) if name == "cross_up" else (prev & ~cur)
            out[ref_w:] = flag.astype(np.float64)
    elif name == "dma":
        long_w = int(p.get("long", 50))
        out = sma(c, w) - sma(c, long_w)
    elif name == "pdi":
        out = _dmi(candles, w)[0]
    elif name == "mdi":
        out = _dmi(candles, w)[1]
    elif name == "dx":
        out = _dx(candles, w)
    elif name == "adx":
        out = _adx(candles, w, int(p.get("dmi_window", 10)))
    elif name == "adxr":
        adx = _adx(candles, int(p.get("adx_window", 5)), int(p.get("dmi_window", 10)))
        start = int(np.argmax(np.isfinite(adx))) if np.any(np.isfinite(adx)) else n
        out = _wilder_smooth(np.nan_to_num(adx), start, w) if start < n else _nan(n)
    elif name == "trix":
        t3 = _series_ema_chain(c, w)[2]
        out = _nan(n)
        if n > 1:
            prev = t3[:-1]
            with np.errstate(divide="ignore", invalid="ignore"):
                out[1:] = np.where(prev == 0.0, np.nan, 100.0 * (t3[1:] - prev) / np.where(prev == 0, 1, prev))
    elif name == "tema":
        t1, t2, t3 = _series_ema_chain(c, w)
        out = 3.0 * t1 - 3.0 * t2 + t3
    elif name == "vr":
        out = _nan(n)
        if n >= 2 and w <= n - 1:
            delta = np.diff(c)
            av = np.where(delta > 0, v[1:], 0.0)
            bv = np.where(delta < 0, v[1:], 0.0)
            cv = np.where(delta == 0, v[1:], 0.0)
            up = _roll(av, w).sum(axis=1) + _roll(cv, w).sum(axis=1) / 2.0
            down = _roll(bv, w).sum(axis=1) + _roll(cv, w).sum(axis=1) / 2.0
            with np.errstate(divide="ignore", invalid="ignore"):
                out[w:] = np.where(down == 0.0, np.nan, 100.0 * up / down)
    else:  # pragma: no cover - catalogue and dispatch kept in sync
        raise UnsupportedIndicatorError(name, CATALOGUE)

    if spec.lag > 1:
        shifted = _nan(n)
        shifted[spec.lag - 1 :] = out[: n - (spec.lag - 1)]
        out = shifted
    return out


DEFAULT_WINDOWS = {
    "sma": 10, "wma": 10, "ema": 10, "mstd": 10, "mvar": 10, "rsi": 10,
    "roc": 10, "momentum": 10, "rsv": 10, "kdjk": 10, "kdjd": 10, "kdjj": 10,
    "boll_mid": 10, "boll_ub": 10, "boll_lb": 10, "macds": 5, "macdh": 5,
    "cr": 10, "wr": 10, "cci": 10, "atr": 10, "max_in_range": 10,
    "min_in_range": 10, "dma": 10, "pdi": 10, "mdi": 10, "dx": 10, "adx": 5,
    "adxr": 10, "trix": 10, "tema": 10, "vr": 10, "cross_up": 10,
    "cross_down": 10, "count": 10, "count_fc": 10, "permutation": 10,
}

_NO_WINDOW = frozenset({"obv", "middle", "tr", "log_return", "compare", "macd"})
CATALOGUE = frozenset(DEFAULT_WINDOWS) | _NO_WINDOW


def column_name(spec: IndicatorSpec) -> str:
    """Deterministic column name: indicator name plus parameter suffixes."""
    name = spec.name
    if name in ("obv", "middle", "tr", "log_return"):
        return name
    w = spec.window if spec.window is not None else DEFAULT_WINDOWS.get(name)
    p = spec.params
    if name == "compare":
        return f"compare_{p.get('relation', 'gt')}_{int(p.get('shift', 1))}"
    if name in ("count", "count_fc"):
        return f"{name}_{p.get('relation', 'gt')}_{int(p.get('shift', 1))}_{w}"
    if name in ("macd", "macds", "macdh"):
        fast, slow = int(p.get("fast", 12)), int(p.get("slow", 26))
        if name == "macd":
            return f"macd_{fast}_{slow}"
        return f"{name}_{fast}_{slow}_{w}"
    if name == "dma":
        return f"dma_{w}_{int(p.get('long', 50))}"
    if name == "permutation":
        return f"perm_{w}"
    return f"{name}_{w}"


def default_specs() -> list[IndicatorSpec]:
    """The canonical 36-column indicator list.

    One column per catalogue row: the duplicated moving-average and strength
    rows are absorbed by the two Bollinger bands and the two cross flags, the
    stochastic family is represented by its K line, the convergence family by
    its 12/26 line, and the directional family by +DI, -DI, ADX(5), ADXR(10).
    The forward count variant is deliberately excluded: it reads future bars.
    """
    w = 10
    return [
        IndicatorSpec("sma", w),
        IndicatorSpec("wma", w),
        IndicatorSpec("rsi", w),
        IndicatorSpec("roc", w),
        IndicatorSpec("momentum", w),
        IndicatorSpec("obv"),
        IndicatorSpec("permutation", w),
        IndicatorSpec("log_return"),
        IndicatorSpec("max_in_range", w),
        IndicatorSpec("min_in_range", w),
        IndicatorSpec("middle"),
        IndicatorSpec("compare", params={"relation": "gt", "shift": 1}),
        IndicatorSpec("count", w, params={"relation": "gt", "shift": 1}),
        IndicatorSpec("ema", w),
        IndicatorSpec("mstd", w),
        IndicatorSpec("mvar", w),
        IndicatorSpec("rsv", w),
        IndicatorSpec("kdjk", w),
        IndicatorSpec("boll_ub", w),
        IndicatorSpec("boll_lb", w),
        IndicatorSpec("macd", params={"fast": 12, "slow": 26}),
        IndicatorSpec("cr", w),
        IndicatorSpec("wr", w),
        IndicatorSpec("cci", w),
        IndicatorSpec("tr"),
        IndicatorSpec("atr", w),
        IndicatorSpec("cross_up", w),
        IndicatorSpec("cross_down", w),
        IndicatorSpec("dma", w, params={"long": 50}),
        IndicatorSpec("pdi", w),
        IndicatorSpec("mdi", w),
        IndicatorSpec("adx", 5, params={"dmi_window": 10}),
        IndicatorSpec("adxr", w, params={"adx_window": 5, "dmi_window": 10}),
        IndicatorSpec("trix", w),
        IndicatorSpec("tema", w),
        IndicatorSpec("vr", w),
    ]


def indicator_frame(candles: CandleSeries, specs: list[IndicatorSpec]) -> IndicatorFrame:
    """Compute every requested column on the candle time axis."""
    if not specs:
        raise ValueError("specs must be non-empty")
    columns: dict[str, np.ndarray] = {}
    warmups: dict[str, int] = {}
    for spec in specs:
        name = column_name(spec)
        if name in columns:
            raise ValueError(f"duplicate indicator column {name!r}")
        col = compute_indicator(spec, candles)
        columns[name] = col
        finite = np.isfinite(col)
        warmups[name] = int(np.argmax(finite)) if finite.any() else len(col)
    return IndicatorFrame(timestamps=candles.timestamps, columns=columns, warmups=warmups)


def write_indicator_frame(frame: IndicatorFrame, path) -> None:
    """Wide CSV export; undefined entries become empty cells."""
    header = "timestamp," + ",".join(frame.names)
    lines = [header]
    names = frame.names
    for i in range(len(frame)):
        cells = [str(int(frame.timestamps[i]))]
        for name in names:
            value = frame.columns[name][i]
            cells.append("" if not np.isfinite(value) else repr(float(value)))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_indicator_frame(path) -> IndicatorFrame:
    """Read a wide CSV produced by write_indicator_frame."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError(f"{path}: empty file")
    header = lines[0].split(",")
    if header[0] != "timestamp":
        raise ParseError(f"{path}: first column must be timestamp")
    names = header[1:]
    ts, data = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise ParseError(f"{path}: line {lineno}: expected {len(header)} cells")
        ts.append(int(cells[0]))
        data.append([float(cell) if cell else np.nan for cell in cells[1:]])
    matrix = np.asarray(data, dtype=np.float64).reshape(len(ts), len(names))
    columns = {name: matrix[:, j] for j, name in enumerate(names)}
    warmups = {}
    for name, col in columns.items():
        finite = np.isfinite(col)
        warmups[name] = int(np.argmax(finite)) if finite.any() else len(col)
    return IndicatorFrame(np.asarray(ts, dtype=np.int64), columns, warmups)
