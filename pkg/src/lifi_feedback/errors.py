"""Exception types raised across the package."""


class LiFiError(Exception):
    """Base class for all package errors."""


class ConfigError(LiFiError, ValueError):
    """Malformed, missing or out-of-range configuration values."""


class DegenerateGeometryError(LiFiError, ValueError):
    """Transmitter and receiver coincide, so the path length is zero."""


class InfeasibleRateError(LiFiError, ValueError):
    """The requested rate cannot be carried by the available subcarriers."""


class IntervalError(LiFiError, ValueError):
    """An update interval lies outside the range where the model is defined."""


class NoRootError(LiFiError, RuntimeError):
    """The expected throughput derivative has no sign change on the search range."""
