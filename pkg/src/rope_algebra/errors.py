"""Exception hierarchy shared by every module."""


class RopeAlgebraError(Exception):
    """Base class for all library errors."""


class DimensionError(RopeAlgebraError, ValueError):
    """Shapes or lengths do not agree."""


class DomainError(RopeAlgebraError, ValueError):
    """An argument lies outside the accepted domain (non-finite, odd d, ...)."""


class StateError(RopeAlgebraError):
    """The object lacks data the operation needs (e.g. a block plan)."""


class ResourceError(RopeAlgebraError):
    """The requested computation exceeds a hard size cap."""


class OrthogonalityError(RopeAlgebraError, ValueError):
    """A matrix expected to be orthogonal is not.

    The measured ``residual`` (Frobenius norm of Q^T Q - I) is kept on the
    exception so callers can report it.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class InconsistencyError(RopeAlgebraError):
    """A rotation cannot have been produced by the given generator set."""


class NumericalWarning(UserWarning):
    """Emitted when a solve is ill-conditioned but still carried out."""
