"""Exception hierarchy shared by all taildep modules."""


class TailDepError(Exception):
    """Base class for taildep errors."""


class InvalidSampleError(TailDepError, ValueError):
    """The sample is too small or contains non-finite values."""


class DomainError(TailDepError, ValueError):
    """A parameter lies outside the domain of its family."""


class PreconditionError(TailDepError, ValueError):
    """An argument violates the documented precondition of an operation."""


class NotInRangeError(TailDepError):
    """The moment vector is not in the image of the moment map.

    The raw moments are kept on the exception so that callers can log or
    tabulate them.
    """

    def __init__(self, moments, message=None):
        self.moments = moments
        super().__init__(message or f"moments {moments!r} are outside the image of the moment map")


class AmbiguousRootError(TailDepError):
    """More than one admissible parameter reproduces the moments."""

    def __init__(self, moments, candidates):
        self.moments = moments
        self.candidates = candidates
        super().__init__(
            f"moments {moments!r} admit {len(candidates)} admissible solutions: {candidates!r}"
        )


class DegenerateCovarianceError(TailDepError):
    """A covariance matrix is singular or not positive semi-definite."""


class ModelError(TailDepError):
    """The tail copula of a model violates a structural property (e.g. 2-increasingness)."""
