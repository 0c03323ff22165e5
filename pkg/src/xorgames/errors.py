"""Exception hierarchy shared by the solvers, builders and CLI."""


class XorGameError(Exception):
    """Base class for every error raised by this package."""


class DomainError(XorGameError, ValueError):
    """An argument lies outside the domain of the operation."""


class SizeError(XorGameError):
    """A game is too large for exhaustive enumeration under the current guard."""


class ConstructionError(XorGameError):
    """An explicit quantum strategy could not be built.

    ``best_bias`` holds the best bias reached before giving up, when known.
    """

    def __init__(self, message, best_bias=None):
        super().__init__(message)
        self.best_bias = best_bias


class DegenerateNormalizationError(ConstructionError):
    """A printed normalization constant vanishes at the requested point."""


class DegeneracyError(XorGameError, ValueError):
    """A matrix has an eigenvalue too close to zero to take its sign."""
