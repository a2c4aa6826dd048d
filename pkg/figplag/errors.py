"""Exceptions shared across services. Service-specific errors live next to their service."""


class FigplagError(ValueError):
    """Base class for every expected figplag failure."""


class ConfigError(FigplagError):
    """Raised when settings or a config file cannot be resolved."""


class EmptyCorpusError(FigplagError):
    """Raised when a corpus holds no usable documents."""
