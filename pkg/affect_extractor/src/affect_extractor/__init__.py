"""Transformer-based affect scoring for raw comment CSVs."""

from .errors import ExtractorError, InputError, ModelResolutionError
from .models import load_emotion_model, load_sentiment_model
from .scoring import AFFECT_HEADER, COMMENT_HEADER, ScoreSummary, score_comments

__version__ = "0.1.0"

__all__ = [
    "AFFECT_HEADER",
    "COMMENT_HEADER",
    "ExtractorError",
    "InputError",
    "ModelResolutionError",
    "ScoreSummary",
    "load_emotion_model",
    "load_sentiment_model",
    "score_comments",
    "__version__",
]
