"""Exception types shared across the package."""


class AircovError(Exception):
    """Base class for all package errors."""


class DomainError(AircovError, ValueError):
    """An argument lies outside the domain of the model."""


class SingularityError(AircovError, ArithmeticError):
    """A rational fit evaluated at (or next to) its pole."""


class UnboundedRadiusError(AircovError, ArithmeticError):
    """Coverage never drops below the threshold inside the search cap."""


class UnsupportedError(AircovError, ValueError):
    """Request falls outside a tabulated range (e.g. fleets larger than 10)."""
