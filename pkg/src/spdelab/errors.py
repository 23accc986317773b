"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid run configuration: bad grid dimensions, stability/CFL violation,
    inconsistent experiment settings."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation (t <= 0,
    position off the interval, malformed index)."""


class UnsupportedError(ValueError):
    """Requested a combination the method does not support (e.g. a nonlinear
    sigma where the moment identity only closes for linear sigma)."""


class FitError(ValueError):
    """Too few usable points to fit a scaling exponent."""
