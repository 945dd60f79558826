"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or distribution parameters."""


class StabilityError(ConfigError):
    """Arrival rate does not leave both queues stable (lambda >= min service rate)."""


class NumericError(ArithmeticError):
    """Non-finite densities, excessive tail truncation, or similar numeric failures."""
