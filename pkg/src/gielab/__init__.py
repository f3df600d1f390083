"""gielab: numerics for gravitationally induced entanglement, CHSH bounds
under noncommuting observables, finite-dimensional algebra diagnostics and
no-signalling tests."""

from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .errors import (
    ConfigError,
    ContractError,
    DegeneracyError,
    DimensionError,
    GielabError,
    ImageChargeError,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CONSTANTS",
    "PhysicalConstants",
    "ConfigError",
    "ContractError",
    "DegeneracyError",
    "DimensionError",
    "GielabError",
    "ImageChargeError",
    "__version__",
]
