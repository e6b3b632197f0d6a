"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration and input problems exit
with 2, physics/topology problems with 3, numerical non-convergence with 4.
"""


class DarkRingError(Exception):
    """Base class for all package errors."""


class ParameterError(DarkRingError):
    """An argument is outside its valid range."""


class SamplingError(DarkRingError):
    """A grid cannot faithfully hold the requested field."""


class GridMismatchError(DarkRingError):
    """Two gridded objects were combined but their grids differ."""


class DomainError(DarkRingError):
    """A query point lies outside a gridded volume."""


class TopologyError(DarkRingError):
    """The intensity landscape lacks an expected feature (e.g. a bounded ring)."""


class BracketError(DarkRingError):
    """A scalar root search found no sign change in its bracket."""


class StabilityError(DarkRingError):
    """An integration step or flip probability violates its stability bound."""


class FitError(DarkRingError):
    """A curve fit is degenerate or failed to converge."""


class ConfigError(DarkRingError):
    """A run configuration file is malformed or incomplete."""
