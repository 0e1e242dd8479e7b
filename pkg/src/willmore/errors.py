"""Exception taxonomy.

DomainError and its subclasses map to CLI exit code 1, ConfigError to 2.
"""
from __future__ import annotations


class WillmoreError(Exception):
    pass


class ConfigError(WillmoreError):
    """Bad or incomplete run configuration."""


class DomainError(WillmoreError):
    """Input outside the mathematical domain (validity radius, ranges)."""


class MetricError(DomainError):
    """Metric evaluation produced a non symmetric-positive-definite result."""


class GeometryError(DomainError):
    """Degenerate surface geometry (non-embedded graph, singular metric)."""


class IntegratorError(DomainError):
    """Geodesic integration failed (left the chart, step underflow)."""


class NumericalError(WillmoreError):
    """A finite-difference or cancellation check failed."""


class NoConvergenceError(WillmoreError):
    """Iteration exceeded its budget; carries the residual history."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class DegenerateLandscapeError(WillmoreError):
    """Reduced functional has no isolated nondegenerate critical point."""


class DegenerateBasisError(WillmoreError):
    """Kernel basis Gram matrix numerically singular."""
