"""Exception types shared across the pipeline."""


class GreenlensError(Exception):
    """Base class for all toolkit errors."""


class DataError(GreenlensError):
    """Malformed input data or a violated data contract."""


class ConfigError(GreenlensError):
    """Invalid experiment or algorithm configuration."""
