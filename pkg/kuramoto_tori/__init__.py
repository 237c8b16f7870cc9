"""
kuramoto_tori - Equilibrium manifolds of the Kuramoto model on graphs.

Graph families, phase configurations, the gradient vector field, Jacobian
spectra of equilibrium tori, and numerical maps of connecting orbits.
"""

from kuramoto_tori.dynamics import TrajectoryRecord, energy, energy_gradient, integrate, residual, rhs
from kuramoto_tori.errors import (
    AsymmetricMatrixError,
    CatalogError,
    DimensionMismatch,
    EnumerationLimitError,
    GraphError,
    IntegrationError,
    InvalidConfiguration,
    KuramotoError,
    NotBalancedError,
    NotEquilibriumError,
    NumericalFailure,
    PartitionError,
)
from kuramoto_tori.graphs import Graph, generate, is_connected, neighbors, parse_family
from kuramoto_tori.spectral import SpectrumReport, classify, jacobian, spectrum

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "generate",
    "neighbors",
    "is_connected",
    "parse_family",
    "rhs",
    "energy",
    "energy_gradient",
    "residual",
    "integrate",
    "TrajectoryRecord",
    "jacobian",
    "spectrum",
    "classify",
    "SpectrumReport",
    "KuramotoError",
    "GraphError",
    "DimensionMismatch",
    "PartitionError",
    "InvalidConfiguration",
    "NotBalancedError",
    "NotEquilibriumError",
    "AsymmetricMatrixError",
    "IntegrationError",
    "EnumerationLimitError",
    "NumericalFailure",
    "CatalogError",
]
