"""Shared exception types and the process exit codes they map to."""

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_TRAINING = 4
EXIT_IO = 5


class PipelineError(Exception):
    """Base class for everything raised deliberately by this package."""

    exit_code = 1


class ConfigError(PipelineError):
    """Invalid or inconsistent experiment configuration."""

    exit_code = EXIT_CONFIG


class DataError(PipelineError):
    """Problem with input data content."""

    exit_code = EXIT_DATA


class ParseError(DataError):
    """A file could not be parsed (malformed row, non-numeric field)."""


class ValidationError(DataError):
    """Parsed data violates a documented invariant."""


class UnsupportedIndicatorError(ConfigError, ValueError):
    """An indicator name outside the supported catalogue was requested."""

    def __init__(self, name, catalogue):
        listing = ", ".join(sorted(catalogue))
        super().__init__(f"unsupported indicator {name!r}; supported: {listing}")
        self.name = name
        self.catalogue = tuple(sorted(catalogue))


class TrainingError(PipelineError):
    """Model training failed."""

    exit_code = EXIT_TRAINING


class TrainingDivergedError(TrainingError):
    """Loss became non-finite during training."""

    def __init__(self, epoch, message=""):
        super().__init__(message or f"training diverged at epoch {epoch}")
        self.epoch = epoch


class SearchError(TrainingError):
    """Every configuration in a grid search failed."""


class OutputError(PipelineError):
    """An artifact could not be written."""

    exit_code = EXIT_IO
