"""Exception types, each mapped to a CLI exit code."""


class ConfigError(ValueError):
    """Invalid configuration or usage (exit code 1)."""


class DataError(ValueError):
    """Input data that cannot be used (exit code 2)."""


class InvariantError(RuntimeError):
    """Internal consistency check failed (exit code 3)."""
