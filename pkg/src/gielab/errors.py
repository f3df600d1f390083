"""Exception hierarchy shared by all gielab modules."""


class GielabError(Exception):
    """Base class for all library errors."""


class DimensionError(GielabError, ValueError):
    """Shapes or tensor-factor dimensions are inconsistent or too large."""


class ContractError(GielabError, ValueError):
    """An input violates a documented precondition (Hermiticity, unitarity, ...)."""

    def __init__(self, message: str, invariant: str | None = None):
        super().__init__(message)
        self.invariant = invariant or message


class DegeneracyError(ContractError):
    """Physical parameters hit a singular configuration (e.g. dx >= d)."""


class ImageChargeError(ContractError):
    """Separation too large relative to the periodic box; images dominate."""


class ConfigError(GielabError, ValueError):
    """Malformed run configuration. ``path`` names the offending field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
