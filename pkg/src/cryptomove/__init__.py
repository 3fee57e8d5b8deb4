"""Cryptocurrency price-movement classification pipeline.

Builds trading and social-affect indicator features from OHLCV candles and
comment-level affect records, labels up/down movements, and classifies them
with from-scratch MLP, LSTM, MALSTM-FCN, and 1-D CNN models under grid-search
tuning with bootstrap validation.
"""

__version__ = "0.1.0"

from pathlib import Path

from .pipeline import ExperimentConfig, RunResult, load_config, run_experiment


def fixture_path(name: str) -> Path:
    """Absolute path of a bundled demo input file (see the fixtures dir)."""
    p = Path(__file__).parent / "fixtures" / name
    if not p.is_file():
        raise FileNotFoundError(f"no bundled fixture named {name!r}")
    return p


__all__ = [
    "ExperimentConfig",
    "RunResult",
    "fixture_path",
    "load_config",
    "run_experiment",
    "__version__",
]
