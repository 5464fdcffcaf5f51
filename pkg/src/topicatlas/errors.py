"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 2,
DataError -> 3, NumericalError -> 4.
"""


class TopicAtlasError(Exception):
    """Base class for all package errors."""


class ConfigError(TopicAtlasError):
    """Invalid option, flag, spec key, or parameter combination."""


class DataError(TopicAtlasError):
    """Malformed or inconsistent input data (corpus, model, spec files)."""


class NumericalError(TopicAtlasError):
    """A numerical routine failed to produce a usable result."""
