"""Exception types shared across the library."""


class Error(Exception):
    """Base class for all gaugebregman errors."""


class ArgumentError(Error, ValueError):
    """An argument is malformed or out of its documented range."""


class DomainError(Error, ValueError):
    """A point lies outside the domain of a generator or scaler."""


class ShapeError(Error, ValueError):
    """An array input has the wrong shape or violates a structural invariant."""


class NumericalError(Error, RuntimeError):
    """An iterative numerical routine failed to converge."""


class FitError(Error, RuntimeError):
    """Model fitting received degenerate data."""


class IdentityPreconditionError(Error, ValueError):
    """The preconditions of a scaled-divergence identity do not hold."""


class OutOfRegimeError(Error, ValueError):
    """A guarantee was requested outside the regime where it is proved."""
