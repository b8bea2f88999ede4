"""Simulation and verification toolkit for the Poissonized Erdos-Renyi graph."""

from poisson_er.errors import DomainError, ParameterError, TruncationError

__version__ = "0.1.0"

__all__ = ["DomainError", "ParameterError", "TruncationError", "__version__"]
