"""Batch scoring of raw comments into affect feature rows.

The output CSV uses the schema the downstream pipeline ingests:
timestamp, source, channel, sentiment in {-1, 0, 1}, one-hot emotion
columns, and zeroed valence/arousal/dominance (those are lexicon scores
the pipeline fills in itself when configured with a lexicon). Rows that
cannot yield a valid output row are skipped and itemized in a sidecar
log next to the output file.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .errors import InputError
from .models import EmotionModel, SentimentModel, load_emotion_model, load_sentiment_model

COMMENT_HEADER = ("timestamp", "source", "channel", "text")
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
SOURCES = ("github", "reddit")

_BATCH = 32
_MAX_TOKENS = 256


@dataclass
class ScoreSummary:
    """What a scoring run read, wrote, and rejected."""

    rows_read: int
    rows_written: int
    rows_skipped: int
    output_path: Path
    sidecar_path: Path


def _read_comments(path: Path):
    """Valid (timestamp, source, channel, text) rows plus skip reasons."""
    try:
        with open(path, newline="", encoding="utf-8-sig") as fh:
            rows = [(lineno, row) for lineno, row in enumerate(csv.reader(fh), start=1)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise InputError(f"{path} is not valid UTF-8: {exc}") from exc
    if not rows:
        raise InputError(f"{path}: empty file, expected header {','.join(COMMENT_HEADER)}")
    header_line, header = rows[0]
    if tuple(cell.strip().lower() for cell in header) != COMMENT_HEADER:
        raise InputError(
            f"{path}: line {header_line}: expected header {','.join(COMMENT_HEADER)}"
        )
    valid = []
    skips = []
    for lineno, row in rows[1:]:
        if len(row) != len(COMMENT_HEADER):
            skips.append((lineno, f"expected {len(COMMENT_HEADER)} columns, got {len(row)}"))
            continue
        raw_ts, source, channel, text = row
        try:
            timestamp = int(raw_ts.strip())
        except ValueError:
            skips.append((lineno, f"timestamp {raw_ts!r} is not unix seconds"))
            continue
        if timestamp < 0:
            skips.append((lineno, f"timestamp {timestamp} is negative"))
            continue
        if source not in SOURCES:
            skips.append((lineno, f"source must be one of {SOURCES}, got {source!r}"))
            continue
        if not text.strip():
            skips.append((lineno, "empty text"))
            continue
        valid.append((timestamp, source, channel, text))
    return valid, skips


def _max_length(tokenizer) -> int:
    limit = getattr(tokenizer, "model_max_length", _MAX_TOKENS)
    if not isinstance(limit, int) or limit <= 0 or limit > 100_000:
        return _MAX_TOKENS
    return min(limit, _MAX_TOKENS)


def _classify(texts, sentiment: SentimentModel, emotion: EmotionModel):
    """Per-text polarity and top target emotion, in input order."""
    import torch

    polarities = []
    emotions = []
    emo_indices = sorted(emotion.targets)
    with torch.inference_mode():
        for start in range(0, len(texts), _BATCH):
            batch = texts[start : start + _BATCH]
            enc = sentiment.tokenizer(
                batch, padding=True, truncation=True,
                max_length=_max_length(sentiment.tokenizer), return_tensors="pt",
            )
            logits = sentiment.model(**enc).logits
            polarities.extend(sentiment.polarity[int(i)] for i in logits.argmax(dim=1))

            enc = emotion.tokenizer(
                batch, padding=True, truncation=True,
                max_length=_max_length(emotion.tokenizer), return_tensors="pt",
            )
            logits = emotion.model(**enc).logits[:, emo_indices]
            emotions.extend(
                emotion.targets[emo_indices[int(i)]] for i in logits.argmax(dim=1)
            )
    return polarities, emotions


def score_comments(
    input_path,
    output_path,
    *,
    sentiment_model,
    emotion_model,
    offline: bool = False,
) -> ScoreSummary:
    """Score a comment CSV into an affect CSV plus a sidecar skip log.

    Model arguments may be checkpoint ids or already-loaded model objects
    from this package's loaders. One output row is written per valid input
    row, in input order; the sidecar log records every skipped row with its
    line number and reason.
    """
    input_path = Path(input_path)
    output_path = Path(output_path)
    valid, skips = _read_comments(input_path)
    if isinstance(sentiment_model, (str, Path)):
        sentiment_model = load_sentiment_model(str(sentiment_model), offline)
    if isinstance(emotion_model, (str, Path)):
        emotion_model = load_emotion_model(str(emotion_model), offline)
    texts = [text for _, _, _, text in valid]
    polarities, top_emotions = _classify(texts, sentiment_model, emotion_model) if texts else ([], [])

    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(AFFECT_HEADER)
        for (timestamp, source, channel, _), polarity, top in zip(valid, polarities, top_emotions):
            onehot = [1 if name == top else 0 for name in ("love", "joy", "anger", "sadness")]
            writer.writerow([timestamp, source, channel, polarity, *onehot, 0, 0, 0])

    sidecar_path = output_path.with_name(output_path.name + ".skipped.log")
    total = len(valid) + len(skips)
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        for lineno, reason in skips:
            fh.write(f"line {lineno}: {reason}\n")
        fh.write(f"skipped {len(skips)} of {total} data rows\n")

    return ScoreSummary(total, len(valid), len(skips), output_path, sidecar_path)
