"""Exception types shared across the package."""


class ChainError(Exception):
    """Base class for all errors raised by lmechain."""


class DomainError(ChainError, ValueError):
    """An argument lies outside the domain of the operation."""


class NonHurwitz(ChainError):
    """The drift matrix has an eigenvalue with nonnegative real part, so no steady state exists."""


class SolverSingular(ChainError):
    """The linear system behind a steady-state solve is numerically rank deficient."""


class Unphysical(ChainError):
    """A covariance matrix violates the uncertainty principle."""


class WrongShape(ChainError, ValueError):
    """A closed form was requested outside the geometry it covers."""


class DimensionBudget(ChainError):
    """A truncated Hilbert space exceeds the configured size limit."""


class DegenerateKernel(ChainError):
    """The Liouvillian kernel is not one-dimensional."""


class InconsistentSigns(ChainError):
    """A heat/work triple matches no operating regime."""


class InsufficientSamples(ChainError, ValueError):
    """Too few interaction times were supplied for an extrapolation."""
