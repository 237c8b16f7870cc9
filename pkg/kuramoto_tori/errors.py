"""Custom exceptions for the kuramoto_tori library."""


class KuramotoError(Exception):
    """Base exception for all kuramoto_tori errors."""

    pass


class GraphError(KuramotoError):
    """Raised when a graph family, edge list or vertex index is invalid."""

    pass


class DimensionMismatch(KuramotoError):
    """Raised when a configuration, shift tuple or matrix has the wrong length."""

    pass


class PartitionError(KuramotoError):
    """Raised when vertex parts overlap, leave vertices uncovered, or are empty."""

    pass


class InvalidConfiguration(KuramotoError):
    """Raised when a phase vector or vertex subset cannot be used (empty, non-finite)."""

    pass


class NotBalancedError(KuramotoError):
    """Raised when an operation requires a balanced configuration and gets another."""

    pass


class NotEquilibriumError(KuramotoError):
    """Raised when an operation requires an equilibrium and the residual is too large."""

    pass


class AsymmetricMatrixError(KuramotoError):
    """Raised when a matrix handed to the symmetric eigensolver is not symmetric."""

    pass


class IntegrationError(KuramotoError):
    """Raised when a trajectory leaves the finite numbers."""

    pass


class EnumerationLimitError(KuramotoError):
    """Raised when an exhaustive enumeration would exceed its size guard."""

    pass


class NumericalFailure(KuramotoError):
    """Raised when a spectrum contradicts a structural fact (no zero eigenvalue)."""

    pass


class CatalogError(KuramotoError):
    """Raised when no equilibrium component catalog exists for a graph."""

    pass
