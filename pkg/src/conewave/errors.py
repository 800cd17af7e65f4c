"""Exception hierarchy shared across the solver.

Exit-code mapping used by the CLI: ConfigError -> 1, PhysicsError -> 2,
NumericalError -> 3.
"""


class ConewaveError(Exception):
    """Base class for all solver errors."""


class ConfigError(ConewaveError):
    """Invalid run configuration or malformed input file."""


class GeometryError(ConewaveError):
    """Degenerate or inconsistent mesh/interface geometry."""


class ResourceLimitError(ConewaveError):
    """Request exceeds a hard resource bound (e.g. mesh refinement level)."""


class PhysicsError(ConewaveError):
    """Violation of a physical admissibility condition."""


class SubsonicError(PhysicsError):
    """Interface normal speed reaches or exceeds the local sound speed."""

    def __init__(self, message, vertex=None, time=None):
        super().__init__(message)
        self.vertex = vertex
        self.time = time


class DomainError(PhysicsError):
    """Query outside the domain of validity of a field or evaluator."""


class NumericalError(ConewaveError):
    """Numerical failure: singular system, NaN density, lost bracket."""
