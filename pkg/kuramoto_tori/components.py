"""Catalogs of equilibrium components on the complete graph K4 and the 4-cycle.

Each component is a linear family theta = offset + P @ params (mod 2 pi)
with integer generators P whose span contains (1, ..., 1). Membership is
decided by closed-form relations r . theta = target (mod 2 pi), one per
constraint, with integer coefficient rows summing to zero so that the test
is invariant under phase shift.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from kuramoto_tori.defaults import MEMBER_RESIDUAL_TOL, TWO_PI
from kuramoto_tori.dynamics import energy, residual
from kuramoto_tori.errors import CatalogError, DimensionMismatch, NotEquilibriumError
from kuramoto_tori.graphs import Complete, Cycle, Graph, GraphFamily, generate
from kuramoto_tori.phasecfg import reduce, torus_distance, wrap_to_pi

logger = logging.getLogger(__name__)

PI = math.pi


@dataclass(frozen=True)
class EquilibriumComponent:
    """Named linear family of equilibria.

    Attributes:
        name: Label such as "B1" or "S".
        energy: Reference energy, constant on the family.
        offset: Phases at params = 0.
        generators: Integer (n, p) matrix; its column span is the tangent space.
        relations: Pairs (coefficient row, target angle) defining membership.
        pivots: p rows of generators forming a unimodular block, used to
            read parameters back from phases.
    """

    name: str
    energy: float
    offset: Tuple[float, ...]
    generators: Tuple[Tuple[int, ...], ...]
    relations: Tuple[Tuple[Tuple[int, ...], float], ...]
    pivots: Tuple[int, ...]
    _tangent: NDArray[np.float64] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        """Check shapes and precompute the tangent basis."""
        p = self.generator_matrix
        if p.shape[0] != len(self.offset):
            raise DimensionMismatch(f"{self.name}: generators do not match offset length")
        if len(self.pivots) != p.shape[1]:
            raise DimensionMismatch(f"{self.name}: need {p.shape[1]} pivots, got {len(self.pivots)}")
        block = p[list(self.pivots)]
        if abs(abs(round(float(np.linalg.det(block)))) - 1) > 0:
            raise ValueError(f"{self.name}: pivot block is not unimodular")
        for row, _ in self.relations:
            if sum(row) != 0:
                raise ValueError(f"{self.name}: relation {row} is not shift invariant")
        q, _ = np.linalg.qr(p)
        object.__setattr__(self, "_tangent", q)

    @property
    def n(self) -> int:
        """Number of phases."""
        return len(self.offset)

    @property
    def dimension(self) -> int:
        """Manifold dimension, including the phase-shift direction."""
        return len(self.generators[0])

    @property
    def generator_matrix(self) -> NDArray[np.float64]:
        """Generators as a float array."""
        return np.asarray(self.generators, dtype=np.float64)

    def member(self, params: Sequence[float]) -> NDArray[np.float64]:
        """Configuration offset + P @ params."""
        return reduce(np.asarray(self.offset) + self.generator_matrix @ np.asarray(params))

    def sample(self, rng: np.random.Generator, count: int = 1) -> NDArray[np.float64]:
        """count members with uniform parameters, shape (count, n)."""
        params = rng.uniform(0.0, TWO_PI, size=(count, self.dimension))
        return reduce(np.asarray(self.offset) + params @ self.generator_matrix.T)

    def violation(self, c: ArrayLike) -> float:
        """Largest circular defect over the membership relations."""
        theta = np.asarray(c, dtype=np.float64)
        if theta.shape != (self.n,):
            raise DimensionMismatch(f"{self.name}: expected {self.n} phases, got {theta.shape}")
        if not self.relations:
            return 0.0
        rows = np.asarray([r for r, _ in self.relations], dtype=np.float64)
        targets = np.asarray([t for _, t in self.relations])
        return float(np.max(np.abs(wrap_to_pi(rows @ theta - targets))))

    def contains(self, c: ArrayLike, tol: float) -> bool:
        """Closed-form membership test, invariant under phase shift."""
        return self.violation(c) <= tol

    def project(self, c: ArrayLike) -> NDArray[np.float64]:
        """Member of the family that agrees with c on the pivot coordinates."""
        theta = np.asarray(c, dtype=np.float64)
        piv = list(self.pivots)
        block = self.generator_matrix[piv]
        params = np.linalg.solve(block, theta[piv] - np.asarray(self.offset)[piv])
        return self.member(params)

    def distance(self, c: ArrayLike) -> float:
        """Torus distance from c to its projection onto the family."""
        return torus_distance(c, self.project(c))

    def tangent_basis(self) -> NDArray[np.float64]:
        """Orthonormal (n, p) basis of the family's tangent space."""
        return self._tangent.copy()

    def verify(self, g: Graph, rng: np.random.Generator, count: int = 16) -> None:
        """Check that sampled members are equilibria with the reference energy.

        Raises:
            NotEquilibriumError: If a member has residual above 1e-10 or its
                energy differs from the reference by more than 1e-10.
        """
        members = self.sample(rng, count)
        worst = float(np.max(residual(g, members)))
        if worst > MEMBER_RESIDUAL_TOL:
            raise NotEquilibriumError(f"{self.name}: member residual {worst:.3e}")
        drift = float(np.max(np.abs(np.asarray(energy(g, members)) - self.energy)))
        if drift > MEMBER_RESIDUAL_TOL:
            raise NotEquilibriumError(f"{self.name}: member energy off by {drift:.3e}")


def _point(name: str, e: float, offset: Sequence[float]) -> EquilibriumComponent:
    """A phase-shift orbit: a single point up to shift."""
    n = len(offset)
    relations = tuple(
        (tuple(1 if i == k else (-1 if i == 0 else 0) for i in range(n)), offset[k] - offset[0])
        for k in range(1, n)
    )
    return EquilibriumComponent(
        name=name,
        energy=e,
        offset=tuple(offset),
        generators=tuple((1,) for _ in range(n)),
        relations=relations,
        pivots=(0,),
    )


def _antipodal_pairs(
    name: str, e: float, pairs: Tuple[Tuple[int, int], Tuple[int, int]]
) -> EquilibriumComponent:
    """Two antipodal pairs rotating independently: theta_b = theta_a + pi in each pair."""
    (a0, b0), (a1, b1) = pairs
    gens: List[Tuple[int, int]] = [(0, 0)] * 4
    offset = [0.0] * 4
    gens[a0] = gens[b0] = (1, 0)
    gens[a1] = gens[b1] = (0, 1)
    offset[b0] = offset[b1] = PI
    rel0 = tuple(1 if i == b0 else (-1 if i == a0 else 0) for i in range(4))
    rel1 = tuple(1 if i == b1 else (-1 if i == a1 else 0) for i in range(4))
    return EquilibriumComponent(
        name=name,
        energy=e,
        offset=tuple(offset),
        generators=tuple(gens),
        relations=((rel0, PI), (rel1, PI)),
        pivots=(a0, a1),
    )


def complete4_components() -> List[EquilibriumComponent]:
    """Components of the equilibrium set of K4: B1..B3 (E=8), A1..A4 (E=6), S (E=0)."""
    comps = [
        _antipodal_pairs("B1", 8.0, ((0, 1), (2, 3))),
        _antipodal_pairs("B2", 8.0, ((0, 2), (1, 3))),
        _antipodal_pairs("B3", 8.0, ((0, 3), (1, 2))),
    ]
    for i in range(4):
        offset = [PI] * 4
        offset[i] = 0.0
        comps.append(_point(f"A{i + 1}", 6.0, offset))
    comps.append(_point("S", 0.0, [0.0] * 4))
    return comps


def cycle4_components() -> List[EquilibriumComponent]:
    """Components of the equilibrium set of C4: A5 (E=8), B2, C1, C2 (E=4), S (E=0).

    B2, C1 and C2 are 2-tori meeting at the splay state, which is
    completely degenerate.
    """
    c1 = EquilibriumComponent(
        name="C1",
        energy=4.0,
        offset=(0.0, 0.0, 0.0, PI),
        generators=((1, -1), (1, 0), (1, 1), (1, 0)),
        relations=(((0, -1, 0, 1), PI), ((1, -2, 1, 0), 0.0)),
        pivots=(1, 2),
    )
    c2 = EquilibriumComponent(
        name="C2",
        energy=4.0,
        offset=(0.0, 0.0, PI, 0.0),
        generators=((1, 0), (1, 1), (1, 0), (1, -1)),
        relations=(((-1, 0, 1, 0), PI), ((-2, 1, 0, 1), 0.0)),
        pivots=(0, 1),
    )
    return [
        _point("A5", 8.0, [0.0, PI, 0.0, PI]),
        _antipodal_pairs("B2", 4.0, ((0, 2), (1, 3))),
        c1,
        c2,
        _point("S", 0.0, [0.0] * 4),
    ]


_CATALOGS = {
    "complete4": (Complete(4), complete4_components),
    "cycle4": (Cycle(4), cycle4_components),
}


def components_for(family: GraphFamily) -> List[EquilibriumComponent]:
    """Component catalog for a family.

    Raises:
        CatalogError: If no catalog exists for the family.
    """
    for known, build in _CATALOGS.values():
        if family == known:
            return build()
    raise CatalogError(f"no equilibrium component catalog for {family!r}")


def components_for_graph(g: Graph) -> List[EquilibriumComponent]:
    """Component catalog for a graph given by its edge set.

    Raises:
        CatalogError: If the graph is not one of the cataloged graphs.
    """
    for known, build in _CATALOGS.values():
        if g == generate(known):
            return build()
    raise CatalogError(f"no equilibrium component catalog for a graph with {g.n} vertices")


def matching_components(
    c: ArrayLike, components: Sequence[EquilibriumComponent], tol: float
) -> List[EquilibriumComponent]:
    """Every component containing c within tol; several where components intersect."""
    return [comp for comp in components if comp.contains(c, tol)]


def nearest_member(
    c: ArrayLike, components: Sequence[EquilibriumComponent], max_distance: float
) -> Optional[Tuple[EquilibriumComponent, NDArray[np.float64]]]:
    """Closest projection of c onto a component, with its first phase kept.

    Returns:
        (component, member) for the component whose projection is nearest to
        c in torus distance, or None when every projection is farther than
        max_distance.
    """
    theta = np.asarray(c, dtype=np.float64)
    best: Optional[Tuple[float, EquilibriumComponent, NDArray[np.float64]]] = None
    for comp in components:
        p = comp.project(theta)
        d = torus_distance(theta, p)
        if d <= max_distance and (best is None or d < best[0]):
            best = (d, comp, p)
    if best is None:
        return None
    _, comp, p = best
    return comp, reduce(p - p[0] + theta[0])
