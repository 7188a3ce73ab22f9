"""Exception hierarchy.

Limit-based checks have a third outcome besides pass and fail; that outcome
is signalled with :class:`InconclusiveError`, never folded into a failure.
"""


class GeometryError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(GeometryError, ValueError):
    """A point lies outside the open domain of its space."""


class UnreachableError(GeometryError):
    """Two graph vertices lie in different connected components."""


class CapabilityError(GeometryError):
    """The requested operation is not supported by this space kind."""


class ConvergenceError(GeometryError):
    """A numerical limit or minimization did not settle within its budget."""


class InconclusiveError(GeometryError):
    """A finite-horizon surrogate could not decide the question."""

    def __init__(self, message, **detail):
        super().__init__(message)
        self.detail = detail


class MapValidationError(GeometryError):
    """A self-map failed the non-expansion check."""


class PreconditionError(GeometryError, ValueError):
    """Inputs violate the documented precondition of an operation."""


class SamplingError(GeometryError):
    """Rejection sampling could not collect enough points."""


class SolverError(GeometryError):
    """A preimage could not be found to the requested residual."""
