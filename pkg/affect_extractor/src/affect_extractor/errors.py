"""Error types and the exit codes the CLI maps them to."""

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MODEL = 2
EXIT_INPUT = 3


class ExtractorError(Exception):
    """Base class for scoring failures."""

    exit_code = EXIT_ERROR


class ModelResolutionError(ExtractorError):
    """A checkpoint could not be resolved, locally or from the hub."""

    exit_code = EXIT_MODEL


class InputError(ExtractorError):
    """The comment file is missing, unreadable, or has the wrong header."""

    exit_code = EXIT_INPUT
