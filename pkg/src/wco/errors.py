"""Exception hierarchy shared by every module of the package."""


class WCOError(Exception):
    """Base class for all library errors."""


class DomainError(WCOError, ValueError):
    """An argument violates a documented precondition."""


class AmbiguousClassification(WCOError):
    """Fixed-point structure of an automorphism cannot be resolved numerically.

    ``gaps`` holds the eigenvalue diagnostics that triggered the failure.
    """

    def __init__(self, message, gaps=None):
        super().__init__(message)
        self.gaps = gaps


class UnsupportedCase(WCOError):
    """The request lies outside what the closed-form results cover (e.g. elliptic symbols)."""


class NotInvertible(WCOError):
    """The weight is not bounded away from zero on the sphere."""


class TruncationError(WCOError):
    """A truncated computation cannot meet its tail tolerance."""


class SearchError(WCOError):
    """A bounded search ran out of budget; ``best`` records the best value achieved."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class EigensolverError(WCOError):
    """The injected eigensolver failed on a matrix."""


class ConfigError(WCOError, ValueError):
    """A CLI configuration document is malformed."""
