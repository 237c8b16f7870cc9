"""Jacobian spectra and stability classification of equilibrium manifolds.

The Jacobian of the Kuramoto system is symmetric (it is minus the Hessian of
the energy) and has zero row sums, so (1, ..., 1) is always in its kernel.
A d-dimensional manifold of equilibria is transversally stable at a point
when exactly d eigenvalues vanish and the rest are negative.
"""

import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Protocol, Sequence, Tuple, Union

import numpy as np
import scipy.fft
from numpy.typing import ArrayLike, NDArray

from kuramoto_tori.defaults import SYMMETRY_TOL, ZERO_TOL_FACTOR
from kuramoto_tori.dynamics import residual
from kuramoto_tori.errors import AsymmetricMatrixError, DimensionMismatch, NumericalFailure
from kuramoto_tori.graphs import Graph
from kuramoto_tori.workers import ordered_map

logger = logging.getLogger(__name__)


def jacobian(g: Graph, c: ArrayLike) -> NDArray[np.float64]:
    """Jacobian of rhs at c, assembled symmetrically from the edge list.

    Off-diagonal (j, k) is a_jk cos(theta_k - theta_j); the diagonal makes
    every row sum to zero.

    Raises:
        DimensionMismatch: If c does not have length g.n.
    """
    theta = np.asarray(c, dtype=np.float64)
    if theta.shape != (g.n,):
        raise DimensionMismatch(f"configuration shape {theta.shape} does not match n={g.n}")

    w = np.cos(theta[g.dst] - theta[g.src])
    jac = np.zeros((g.n, g.n))
    jac[g.src, g.dst] = w
    jac[g.dst, g.src] = w
    diag = np.zeros(g.n)
    np.add.at(diag, g.src, -w)
    np.add.at(diag, g.dst, -w)
    jac[np.arange(g.n), np.arange(g.n)] = diag
    return jac


@dataclass(frozen=True)
class SpectrumReport:
    """Sorted eigenvalues with zero/positive counts.

    Attributes:
        eigenvalues: Ascending eigenvalues.
        zero_count: Number with |lambda| <= zero_tol.
        positive_count: Number with lambda > zero_tol.
        zero_tol: Tolerance used for the counts.
    """

    eigenvalues: Tuple[float, ...]
    zero_count: int
    positive_count: int
    zero_tol: float

    @property
    def n(self) -> int:
        """Matrix size."""
        return len(self.eigenvalues)

    @property
    def negative_count(self) -> int:
        """Number of eigenvalues below -zero_tol."""
        return self.n - self.zero_count - self.positive_count

    def as_array(self) -> NDArray[np.float64]:
        """Eigenvalues as a float array."""
        return np.asarray(self.eigenvalues, dtype=np.float64)

    def nonzero(self) -> NDArray[np.float64]:
        """Eigenvalues outside the zero band."""
        ev = self.as_array()
        return ev[np.abs(ev) > self.zero_tol]


def spectrum(m: ArrayLike, zero_tol: Optional[float] = None) -> SpectrumReport:
    """Full spectrum of a symmetric matrix.

    Args:
        m: Square symmetric matrix.
        zero_tol: Zero band half-width. Defaults to 1e-8 * max(1, spectral radius).

    Raises:
        AsymmetricMatrixError: If max |m - m^T| exceeds 1e-12.
        DimensionMismatch: If m is not square.
    """
    mat = np.asarray(m, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {mat.shape}")
    asym = float(np.max(np.abs(mat - mat.T))) if mat.size else 0.0
    if asym > SYMMETRY_TOL:
        raise AsymmetricMatrixError(f"matrix asymmetry {asym:.3e} exceeds {SYMMETRY_TOL}")

    ev = np.sort(np.linalg.eigvalsh(mat))
    if zero_tol is None:
        radius = float(np.max(np.abs(ev))) if ev.size else 0.0
        zero_tol = ZERO_TOL_FACTOR * max(1.0, radius)

    return SpectrumReport(
        eigenvalues=tuple(float(x) for x in ev),
        zero_count=int(np.sum(np.abs(ev) <= zero_tol)),
        positive_count=int(np.sum(ev > zero_tol)),
        zero_tol=zero_tol,
    )


def circulant_eigenvalues(first_row: ArrayLike) -> NDArray[np.float64]:
    """Sorted eigenvalues of the real symmetric circulant matrix with this first row.

    lambda_m = sum_k row_k cos(2 pi m k / n), the real part of the DFT of the row.
    """
    row = np.asarray(first_row, dtype=np.float64)
    if row.ndim != 1 or row.size == 0:
        raise DimensionMismatch("first_row must be a non-empty vector")
    return np.sort(np.real(scipy.fft.fft(row)))


def circulant_matrix(first_row: ArrayLike) -> NDArray[np.float64]:
    """Dense circulant matrix whose row j is first_row rolled right by j."""
    row = np.asarray(first_row, dtype=np.float64)
    return np.stack([np.roll(row, j) for j in range(row.size)])


def eye_reference_spectrum(d: int) -> NDArray[np.float64]:
    """Roots of p(lambda)^d for p = lambda (lambda+1/2)^2 (lambda+3/2)^2 (lambda+2)."""
    roots = [0.0] * d + [-0.5] * (2 * d) + [-1.5] * (2 * d) + [-2.0] * d
    return np.sort(np.asarray(roots))


# ============================================================================
# Stability Classes
# ============================================================================


@dataclass(frozen=True)
class TransversallyStable:
    """Exactly d zero eigenvalues, all others negative."""

    d: int

    @property
    def label(self) -> str:
        return f"stable({self.d})"


@dataclass(frozen=True)
class Unstable:
    """Not certified stable; p eigenvalues are positive."""

    p: int

    @property
    def label(self) -> str:
        return f"unstable({self.p})"


@dataclass(frozen=True)
class CompletelyDegenerate:
    """All eigenvalues are zero."""

    @property
    def label(self) -> str:
        return "degenerate"


StabilityClass = Union[TransversallyStable, Unstable, CompletelyDegenerate]


def classify(r: SpectrumReport, expected_manifold_dim: int) -> StabilityClass:
    """Classify an equilibrium from its spectrum.

    Args:
        r: Spectrum of the Jacobian at the equilibrium.
        expected_manifold_dim: Dimension of the equilibrium manifold through
            the point, counting the phase-shift direction.

    Raises:
        NumericalFailure: If no eigenvalue is zero, which cannot happen at an
            exact equilibrium.
        ValueError: If expected_manifold_dim < 1.
    """
    if expected_manifold_dim < 1:
        raise ValueError(f"expected_manifold_dim must be >= 1, got {expected_manifold_dim}")
    if r.zero_count < 1:
        raise NumericalFailure(
            f"no zero eigenvalue within {r.zero_tol:.2e}; not an equilibrium or solver failure"
        )
    if r.zero_count == r.n:
        return CompletelyDegenerate()
    if r.zero_count == expected_manifold_dim and r.positive_count == 0:
        return TransversallyStable(expected_manifold_dim)
    return Unstable(r.positive_count)


# ============================================================================
# Torus Scans
# ============================================================================


class TorusFamily(Protocol):
    """A family of equilibria parametrized by one phase shift per part."""

    @property
    def d(self) -> int: ...

    def configuration(self, shifts: Sequence[float]) -> NDArray[np.float64]: ...


class ScanPoint(NamedTuple):
    """One grid point of a torus scan."""

    shifts: Tuple[float, ...]
    report: SpectrumReport
    residual: float


def shift_line(betas: Sequence[float], d: int) -> List[Tuple[float, ...]]:
    """Shift tuples (0, beta, ..., beta) for each beta; (beta,) when d = 1."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if d == 1:
        return [(float(b),) for b in betas]
    return [(0.0,) + (float(b),) * (d - 1) for b in betas]


def torus_scan(
    g: Graph,
    base: TorusFamily,
    shift_grid: Sequence[Sequence[float]],
    zero_tol: Optional[float] = None,
    max_workers: int = 1,
) -> List[ScanPoint]:
    """Jacobian spectrum at every point of a shift grid.

    Args:
        g: Graph the family lives on.
        base: Torus family building one configuration per shift tuple.
        shift_grid: Shift tuples of length base.d.
        zero_tol: Passed to spectrum.
        max_workers: Parallel eigensolves.

    Raises:
        DimensionMismatch: If a shift tuple has the wrong length.
    """
    for shifts in shift_grid:
        if len(shifts) != base.d:
            raise DimensionMismatch(f"shift tuple {tuple(shifts)} does not have length {base.d}")

    def one(shifts: Sequence[float]) -> ScanPoint:
        c = base.configuration(shifts)
        return ScanPoint(
            shifts=tuple(float(s) for s in shifts),
            report=spectrum(jacobian(g, c), zero_tol),
            residual=float(residual(g, c)),
        )

    logger.info(f"Scanning {len(shift_grid)} shift tuples on a graph with {g.n} vertices")
    return ordered_map(one, shift_grid, max_workers)
