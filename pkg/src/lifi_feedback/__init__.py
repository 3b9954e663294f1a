"""Feedback-reduction analysis for bidirectional LiFi attocell networks.

The package models the optical channel of a room lit by a lattice of LED
access points, the OFDMA downlink, the contention-based uplink, several
feedback schemes and the choice of the feedback update interval that
maximises the weighted sum of uplink and downlink throughput.
"""

from .config import NetworkConfig, load_config
from .errors import (ConfigError, DegenerateGeometryError, InfeasibleRateError,
                     IntervalError, LiFiError, NoRootError)

__version__ = "0.1.0"

__all__ = [
    "NetworkConfig", "load_config", "ConfigError", "DegenerateGeometryError",
    "InfeasibleRateError", "IntervalError", "LiFiError", "NoRootError",
    "__version__",
]
