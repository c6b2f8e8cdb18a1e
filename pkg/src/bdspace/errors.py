"""Exception hierarchy shared by all modules."""


class BDError(Exception):
    """Base class for errors raised by bdspace."""


class InvalidInputError(BDError, ValueError):
    """Non-finite, non-positive or malformed input."""


class DomainError(BDError, ValueError):
    """An operation was called outside the domain where it is defined."""


class StageError(BDError, IndexError):
    """A stage index is out of range, or vectors of different stages were mixed."""


class ResourceLimitError(BDError, MemoryError):
    """A requested construction would exceed the configured memory cap."""

    def __init__(self, message, stage=None, projected_dim=None):
        super().__init__(message)
        self.stage = stage
        self.projected_dim = projected_dim


class InsufficientDataError(DomainError):
    """Too few data points for a fit; ``norms`` carries what was computed."""

    def __init__(self, message, norms=()):
        super().__init__(message)
        self.norms = list(norms)
