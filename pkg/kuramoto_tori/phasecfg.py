"""Phase configurations on the n-torus.

A configuration is a 1-D float array of angles reduced to [0, 2*pi). All
comparisons between angles go through circular differences.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from kuramoto_tori.defaults import ALIGN_TOL, BALANCE_TOL, TWO_PI
from kuramoto_tori.errors import (
    DimensionMismatch,
    InvalidConfiguration,
    NotBalancedError,
)

logger = logging.getLogger(__name__)

Configuration = NDArray[np.float64]
Subset = Optional[Iterable[int]]


def reduce(x: ArrayLike) -> NDArray[np.float64]:
    """Reduce angles to [0, 2*pi), elementwise, for arrays of any shape."""
    r = np.mod(np.asarray(x, dtype=np.float64), TWO_PI)
    # np.mod returns 2*pi for tiny negative inputs
    return np.where(r >= TWO_PI, 0.0, r)


def wrap_to_pi(x: ArrayLike) -> NDArray[np.float64]:
    """Circular difference representative in [-pi, pi)."""
    return np.mod(np.asarray(x, dtype=np.float64) + math.pi, TWO_PI) - math.pi


def as_phases(x: ArrayLike) -> Configuration:
    """Validate a phase vector and reduce it.

    Raises:
        InvalidConfiguration: If x is not a non-empty 1-D vector of finite numbers.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidConfiguration(f"phases must be a non-empty vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidConfiguration("phases must be finite")
    return reduce(arr)


def _select(c: ArrayLike, subset: Subset) -> NDArray[np.float64]:
    theta = np.asarray(c, dtype=np.float64)
    if subset is None:
        idx = list(range(theta.shape[0]))
    else:
        idx = sorted(set(int(k) for k in subset))
    if not idx:
        raise InvalidConfiguration("vertex subset must be nonempty")
    if idx[0] < 0 or idx[-1] >= theta.shape[0]:
        raise InvalidConfiguration(f"vertex subset {idx} out of range for {theta.shape[0]} phases")
    return theta[idx]


def order_parameter(c: ArrayLike, subset: Subset = None) -> complex:
    """Sum of e^{i theta_k} over the subset (the whole configuration by default)."""
    return complex(np.sum(np.exp(1j * _select(c, subset))))


def is_balanced(c: ArrayLike, subset: Subset = None, tol: float = BALANCE_TOL) -> bool:
    """True iff |sum_k e^{i theta_k}| <= tol over the subset.

    Raises:
        InvalidConfiguration: If the subset is empty.
    """
    return abs(order_parameter(c, subset)) <= tol


def is_aligned(c: ArrayLike, subset: Subset = None, tol: float = ALIGN_TOL) -> bool:
    """True iff every pairwise phase difference is within tol of 0 or pi.

    Raises:
        InvalidConfiguration: If the subset is empty.
    """
    theta = _select(c, subset)
    diff = theta[:, None] - theta[None, :]
    # d is within tol of 0 or pi exactly when 2d is within 2 tol of 0
    return bool(np.all(np.abs(wrap_to_pi(2.0 * diff)) <= 2.0 * tol))


def splay(n: int, alpha: float = 0.0) -> Configuration:
    """Splay state (2*pi*k/n + alpha) for k = 1..n."""
    if n < 1:
        raise InvalidConfiguration(f"splay needs n >= 1, got {n}")
    k = np.arange(1, n + 1, dtype=np.float64)
    return reduce(TWO_PI * k / n + alpha)


def canonicalize(c: ArrayLike) -> Configuration:
    """Shift so that the first phase is 0."""
    theta = as_phases(c)
    return reduce(theta - theta[0])


def _max_gap(sorted_rows: NDArray[np.float64]) -> NDArray[np.float64]:
    gaps = np.diff(sorted_rows, axis=-1)
    wrap = sorted_rows[..., :1] + TWO_PI - sorted_rows[..., -1:]
    return np.max(np.concatenate([gaps, wrap], axis=-1), axis=-1)


def torus_distances(a: ArrayLike, many: ArrayLike) -> NDArray[np.float64]:
    """torus_distance from a to each row of many.

    The differences b_k - a_k are points on the circle; the best shift is the
    center of the shortest arc covering them all, so the distance is half of
    2*pi minus the largest circular gap.
    """
    base = np.asarray(a, dtype=np.float64)
    rows = np.atleast_2d(np.asarray(many, dtype=np.float64))
    if rows.shape[-1] != base.shape[0]:
        raise DimensionMismatch(
            f"configuration lengths differ: {base.shape[0]} vs {rows.shape[-1]}"
        )
    d = np.sort(reduce(rows - base), axis=-1)
    return np.asarray((TWO_PI - _max_gap(d)) / 2.0)


def torus_distance(a: ArrayLike, b: ArrayLike) -> float:
    """Minimum over constant shifts s of max_k circ(a_k + s, b_k).

    Raises:
        DimensionMismatch: If the lengths differ.
    """
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape:
        raise DimensionMismatch(f"configuration lengths differ: {va.shape} vs {vb.shape}")
    return float(torus_distances(va, vb[None, :])[0])


# ============================================================================
# Polygon Linkage
# ============================================================================


@dataclass(frozen=True)
class PolygonLinkage:
    """Partial sums u_m = sum_{k<=m} e^{i theta_k} as planar points.

    Attributes:
        points: (n, 2) array; row m-1 holds u_m.
        closed: True iff the polygon closes (u_n at the origin within tolerance).
        closure_defect: |u_n|, the modulus of the order parameter.
    """

    points: NDArray[np.float64]
    closed: bool
    closure_defect: float

    def edge_lengths(self) -> NDArray[np.float64]:
        """Distances |u_m - u_{m-1}| with u_0 at the origin."""
        pts = np.vstack([np.zeros((1, 2)), self.points])
        return np.asarray(np.hypot(*np.diff(pts, axis=0).T))


def linkage(c: ArrayLike, tol: float = BALANCE_TOL) -> PolygonLinkage:
    """Equilateral polygon traced by the unit vectors of c."""
    theta = as_phases(c)
    steps = np.column_stack([np.cos(theta), np.sin(theta)])
    points = np.cumsum(steps, axis=0)
    defect = float(np.hypot(*points[-1]))
    return PolygonLinkage(points=points, closed=defect <= tol, closure_defect=defect)


def balanced_tangent_rank(c: ArrayLike, tol: float = BALANCE_TOL) -> int:
    """Rank of the differential of (sum cos, sum sin) at a balanced configuration.

    Rank 2 means the balanced variety is smooth of dimension n-2 there;
    rank <= 1 marks a singular point.

    Raises:
        NotBalancedError: If c is not balanced within tol.
    """
    theta = as_phases(c)
    if not is_balanced(theta, tol=tol):
        raise NotBalancedError(
            f"configuration not balanced: |order parameter| = {abs(order_parameter(theta)):.3e}"
        )
    d = np.vstack([-np.sin(theta), np.cos(theta)])
    return int(np.linalg.matrix_rank(d, tol=tol))


def random_balanced(
    n: int, rng: np.random.Generator, max_attempts: int = 10000
) -> Configuration:
    """Sample a balanced configuration.

    The first n-2 phases are uniform; the last two close the polygon, which
    requires the partial sum to have modulus at most 2. Draws failing that
    are rejected.

    Raises:
        InvalidConfiguration: If n < 2 or no draw closes within max_attempts.
    """
    if n < 2:
        raise InvalidConfiguration(f"balanced configurations need n >= 2, got {n}")

    for _ in range(max_attempts):
        head = rng.uniform(0.0, TWO_PI, size=n - 2)
        w = -np.sum(np.exp(1j * head))
        r = abs(w)
        if r > 2.0:
            continue
        spread = math.acos(r / 2.0)
        center = float(np.angle(w)) if r > 0 else float(rng.uniform(0.0, TWO_PI))
        tail = np.array([center + spread, center - spread])
        return reduce(np.concatenate([head, tail]))

    raise InvalidConfiguration(f"no balanced draw for n={n} in {max_attempts} attempts")
