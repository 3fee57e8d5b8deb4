"""Checkpoint resolution and label mapping for the two classifier heads.

Model ids are anything ``transformers`` accepts: a hub id or a local
directory. Offline mode restricts resolution to already-cached or local
files. Label names decide the mapping, so any checkpoint whose labels
spell out polarities (or use the generic LABEL_i scheme) works without
configuration.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ModelResolutionError

EMOTIONS = ("love", "joy", "anger", "sadness")

_POLARITY_WORDS = {
    "negative": -1,
    "neg": -1,
    "neutral": 0,
    "positive": 1,
    "pos": 1,
}

_GENERIC_LABEL = re.compile(r"label[ _-]?(\d+)$")


@dataclass
class SentimentModel:
    tokenizer: object
    model: object
    polarity: dict  # class index -> -1 | 0 | 1


@dataclass
class EmotionModel:
    tokenizer: object
    model: object
    targets: dict  # class index -> emotion column name


def _load(model_id: str, offline: bool):
    from transformers import AutoModelForSequenceClassification, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id, local_files_only=offline)
        model = AutoModelForSequenceClassification.from_pretrained(
            model_id, local_files_only=offline
        )
    except Exception as exc:
        where = " in offline mode" if offline else ""
        raise ModelResolutionError(
            f"cannot resolve model {model_id!r}{where}: {exc}"
        ) from exc
    model.eval()
    return tokenizer, model


def sentiment_polarity(id2label: dict) -> dict:
    """Map class indices to {-1, 0, 1} from their label names.

    Accepts explicit polarity words in any casing, or the generic LABEL_i
    scheme read as negative-to-positive order (two classes mean no neutral).
    """
    labels = {int(i): str(name).strip().lower() for i, name in id2label.items()}
    if all(name in _POLARITY_WORDS for name in labels.values()):
        return {i: _POLARITY_WORDS[name] for i, name in labels.items()}
    generic = {}
    for i, name in labels.items():
        m = _GENERIC_LABEL.fullmatch(name)
        if not m:
            raise ModelResolutionError(f"unmappable sentiment label {name!r}")
        generic[i] = int(m.group(1))
    order = sorted(generic, key=generic.get)
    if len(order) == 2:
        return {order[0]: -1, order[1]: 1}
    if len(order) == 3:
        return {order[0]: -1, order[1]: 0, order[2]: 1}
    raise ModelResolutionError(
        f"sentiment model has {len(order)} generic labels, expected 2 or 3"
    )


def load_sentiment_model(model_id: str, offline: bool = False) -> SentimentModel:
    tokenizer, model = _load(model_id, offline)
    return SentimentModel(tokenizer, model, sentiment_polarity(model.config.id2label))


def load_emotion_model(model_id: str, offline: bool = False) -> EmotionModel:
    tokenizer, model = _load(model_id, offline)
    targets = {
        int(i): str(name).strip().lower()
        for i, name in model.config.id2label.items()
        if str(name).strip().lower() in EMOTIONS
    }
    if not targets:
        raise ModelResolutionError(
            f"model {model_id!r} predicts none of the emotions {EMOTIONS}"
        )
    return EmotionModel(tokenizer, model, targets)
