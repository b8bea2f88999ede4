"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument is outside the domain an operation accepts."""


class DomainError(ValueError):
    """A quantity was requested in a regime where it is undefined (e.g. giant targets for c <= 1)."""


class TruncationError(RuntimeError):
    """A walk ended before the requested marker was reached; extend ``k_max``."""
