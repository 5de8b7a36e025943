"""Shared exception types."""


class QlabError(Exception):
    """Base class for qlab failures."""


class DomainError(QlabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ResolutionError(QlabError, RuntimeError):
    """A grid or truncation is too coarse for the requested computation."""


class ConfigError(QlabError, ValueError):
    """An experiment configuration is invalid."""


class NumericError(QlabError, RuntimeError):
    """An iterative numerical procedure failed to converge."""
