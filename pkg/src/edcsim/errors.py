"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid experiment or element configuration (bad value, misaligned time)."""


class GridMismatchError(ValueError):
    """Two sub-waves on different time grids were combined."""


class DomainError(ValueError):
    """Argument of an analytic formula is outside its domain."""


class ConservationError(ValueError):
    """Detector norms violate total-probability conservation."""


class TopologyError(ValueError):
    """A bench program's wiring matches none of the known experiment layouts."""
