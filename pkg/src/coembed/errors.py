"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes, so library code should raise
the most specific class that applies rather than bare ValueError.
"""


class CoembedError(Exception):
    """Base class for all package errors."""


class ConfigError(CoembedError):
    """Invalid configuration or usage: bad hyperparameter, malformed flag,
    missing mandatory column descriptor, unknown strategy name."""


class DataError(CoembedError):
    """Problems with the data itself: unreadable input, corrupt snapshot,
    id-space mismatch between artifacts."""


class DatasetExhaustedError(DataError):
    """Preprocessing or filtering removed every interaction."""

    def __init__(self, message: str = "dataset exhausted"):
        super().__init__(message)


class NumericError(CoembedError):
    """Numeric failure during training or sampling: non-finite loss,
    pathological rejection loops, degenerate fits."""
