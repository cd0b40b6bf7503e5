"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Per-level arrays do not have the shape the tree demands."""


class DomainError(ValueError):
    """A value lies outside the model's admissible range."""


class GridCapError(ValueError):
    """A grid enumeration would exceed the configured size cap."""


class CpsConstructionError(ValueError):
    """No consistent price system can be built for this (measure, lambda) pair."""

    def __init__(self, message: str, level: int | None = None, node_index: int | None = None):
        super().__init__(message)
        self.level = level
        self.node_index = node_index


class LpSizeError(ValueError):
    """The arbitrage LP would exceed the configured horizon cap."""
